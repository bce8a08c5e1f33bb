#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "banksim/generator.hpp"
#include "banksim/measure.hpp"
#include "banksim/ode.hpp"
#include "banksim/particles.hpp"
#include "banksim/simulator.hpp"

namespace banksim {

/// Decimal with 17 significant digits; "NA" for NaN.
std::string csv_real(double v);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// t,N,S,m
std::string grid_csv(const PathRecord& rec);
/// t,kind,id,reserve
std::string events_csv(const PathRecord& rec);
/// Full record including snapshots, impacts and tracked banks.
std::string path_json(const PathRecord& rec);

/// t,m (setting 1) or t,m_tilde,N_inf (setting 2)
std::string ode_csv(const OdeSolution& sol);

/// t,particle_index,reserve
std::string snapshot_csv(const std::vector<std::pair<double, EmpiricalMeasure>>& snaps);
/// t,mean
std::string particle_mean_csv(const ParticleRun& run, std::size_t stride = 1);
/// t,survival_prob,se
std::string survival_csv(const SurvivalCurve& curve, std::size_t stride = 1);

std::string lyapunov_json(const LyapunovReport& rep);

}  // namespace banksim
