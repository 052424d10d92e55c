#pragma once

#include "cscox/core.hpp"
#include "cscox/empirical.hpp"
#include "cscox/likelihood.hpp"
#include "cscox/optimizer.hpp"
#include "cscox/estimator.hpp"
#include "cscox/simulate.hpp"
#include "cscox/bootstrap.hpp"
#include "cscox/io.hpp"
#include "cscox/study.hpp"
