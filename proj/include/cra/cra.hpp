#pragma once

// Counterdiabatic reverse annealing for the ferromagnetic p-spin model:
// symmetry-reduced collective-spin Hamiltonians, variational nested-commutator
// counterdiabatic driving, Schrodinger propagation, spectra and sweep tooling.

#include "cra/cd_driving.hpp"
#include "cra/dynamics.hpp"
#include "cra/errors.hpp"
#include "cra/experiments.hpp"
#include "cra/fits.hpp"
#include "cra/full_space.hpp"
#include "cra/operators.hpp"
#include "cra/params.hpp"
#include "cra/parallel.hpp"
#include "cra/schedule.hpp"
#include "cra/spectra.hpp"
#include "cra/spin_sector.hpp"
