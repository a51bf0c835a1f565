#pragma once

#include "cavnoise/control.hpp"
#include "cavnoise/error.hpp"
#include "cavnoise/grid.hpp"
#include "cavnoise/loop_filter.hpp"
#include "cavnoise/model.hpp"
#include "cavnoise/oracle.hpp"
#include "cavnoise/polynomial.hpp"
#include "cavnoise/spectra.hpp"
#include "cavnoise/spectral_model.hpp"
#include "cavnoise/welch.hpp"
