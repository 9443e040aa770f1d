#pragma once

#include "srb/linalg3.hpp"
#include "srb/elliptic.hpp"
#include "srb/errors.hpp"
#include "srb/frb.hpp"
#include "srb/noise.hpp"
#include "srb/integrators.hpp"
#include "srb/config.hpp"
#include "srb/harness.hpp"
