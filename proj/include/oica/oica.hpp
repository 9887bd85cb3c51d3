#pragma once

// Umbrella header for the online ICA overlap-dynamics toolkit.

#include "oica/error.hpp"
#include "oica/random_stream.hpp"
#include "oica/source_model.hpp"
#include "oica/data_stream.hpp"
#include "oica/online_ica.hpp"
#include "oica/ode_dynamics.hpp"
#include "oica/phase_analysis.hpp"
#include "oica/io.hpp"
