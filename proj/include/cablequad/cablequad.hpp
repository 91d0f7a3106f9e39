#pragma once

#include "cablequad/error.hpp"
#include "cablequad/geom.hpp"
#include "cablequad/model.hpp"
#include "cablequad/dynamics.hpp"
#include "cablequad/linearize.hpp"
#include "cablequad/gains.hpp"
#include "cablequad/controller.hpp"
#include "cablequad/simharness.hpp"
#include "cablequad/scenario_io.hpp"
#include "cablequad/validation.hpp"
