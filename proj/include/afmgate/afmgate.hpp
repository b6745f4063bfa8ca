#pragma once

#include "afmgate/basis.hpp"
#include "afmgate/config_io.hpp"
#include "afmgate/errors.hpp"
#include "afmgate/evolution.hpp"
#include "afmgate/gate.hpp"
#include "afmgate/hamiltonian.hpp"
#include "afmgate/model.hpp"
#include "afmgate/output.hpp"
#include "afmgate/parallel.hpp"
#include "afmgate/presets.hpp"
#include "afmgate/rng.hpp"
#include "afmgate/spectra.hpp"
#include "afmgate/thermal.hpp"
#include "afmgate/units.hpp"
