#pragma once

#include "gsk/common.hpp"
#include "gsk/quadrature.hpp"
#include "gsk/special_functions.hpp"
#include "gsk/kernels.hpp"
#include "gsk/cauchy.hpp"
#include "gsk/roots.hpp"
#include "gsk/linalg.hpp"
#include "gsk/asymptotics.hpp"
#include "gsk/oracle.hpp"
#include "gsk/config.hpp"
#include "gsk/report.hpp"
