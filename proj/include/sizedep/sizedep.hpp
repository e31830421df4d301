#pragma once

#include "sizedep/errors.hpp"
#include "sizedep/specfun.hpp"
#include "sizedep/quadrature.hpp"
#include "sizedep/model.hpp"
#include "sizedep/ingest.hpp"
#include "sizedep/optimize.hpp"
#include "sizedep/fitting.hpp"
#include "sizedep/scaling.hpp"
#include "sizedep/synth.hpp"
