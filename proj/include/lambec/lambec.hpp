#pragma once

#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "lambda_medium.hpp"
#include "linalg.hpp"
#include "pae_algebra.hpp"
#include "scenarios.hpp"
#include "spectral.hpp"
#include "units.hpp"
#include "version.hpp"
