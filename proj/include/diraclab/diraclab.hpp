#pragma once

// Umbrella header: the whole library.

#include "diraclab/common.hpp"
#include "diraclab/config.hpp"
#include "diraclab/core.hpp"
#include "diraclab/dynamics.hpp"
#include "diraclab/hamiltonian.hpp"
#include "diraclab/io.hpp"
#include "diraclab/ionsim.hpp"
#include "diraclab/klein.hpp"
#include "diraclab/runner.hpp"
#include "diraclab/spectra.hpp"
#include "diraclab/states.hpp"
