#pragma once

#include "errors.hpp"
#include "quadrature.hpp"
#include "funcspace.hpp"
#include "measures.hpp"
#include "specfun.hpp"
#include "transgroup.hpp"
#include "trace.hpp"
#include "dsperturb.hpp"
#include "matrixlab.hpp"
