#pragma once

// Umbrella header: the full laboratory in include order.

#include "ellreg/common.hpp"
#include "ellreg/parallel.hpp"
#include "ellreg/tensor.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/coeff.hpp"
#include "ellreg/exact.hpp"
#include "ellreg/quadrature.hpp"
#include "ellreg/sparse.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/fundsol.hpp"
#include "ellreg/partitions.hpp"
#include "ellreg/rescale.hpp"
#include "ellreg/csvio.hpp"
#include "ellreg/config.hpp"
#include "ellreg/experiments.hpp"
