#pragma once

#include "errors.hpp"
#include "json_io.hpp"
#include "measure.hpp"
#include "montecarlo.hpp"
#include "quadrature.hpp"
#include "randmat.hpp"
#include "rate.hpp"
#include "variational.hpp"
