// SPDX-License-Identifier: MIT

#ifndef WCSPSR_WCSPSR_HPP
#define WCSPSR_WCSPSR_HPP

#include "csp.hpp"
#include "directions.hpp"
#include "io.hpp"
#include "optimizer.hpp"
#include "oracle.hpp"
#include "propagate.hpp"
#include "structure.hpp"
#include "tuple_set.hpp"
#include "weights.hpp"

#endif // WCSPSR_WCSPSR_HPP
