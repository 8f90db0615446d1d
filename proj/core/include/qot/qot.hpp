#pragma once

#include "qot/density.hpp"
#include "qot/dynamics.hpp"
#include "qot/experiment.hpp"
#include "qot/fock.hpp"
#include "qot/linalg.hpp"
#include "qot/meanfield.hpp"
#include "qot/pseudometric.hpp"
#include "qot/quantize.hpp"
#include "qot/rng.hpp"
#include "qot/transport_map.hpp"
#include "qot/wasserstein.hpp"
