#pragma once

#include "sav/baselines.hpp"
#include "sav/config.hpp"
#include "sav/esisav.hpp"
#include "sav/field.hpp"
#include "sav/grid.hpp"
#include "sav/harness.hpp"
#include "sav/models.hpp"
#include "sav/navier_stokes.hpp"
#include "sav/presets.hpp"
#include "sav/prng.hpp"
#include "sav/series.hpp"
#include "sav/spectral.hpp"
