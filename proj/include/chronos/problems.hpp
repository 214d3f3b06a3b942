#pragma once

#include <cstddef>
#include <vector>

#include "chronos/model.hpp"

namespace chronos {

/// Reward parameterizations available for the bus problem.
enum class BusRewards {
  /// Lump reward of 100 on acting at the last stop, no rate reward.
  kGoal,
  /// No lump reward, constant rate reward of -1 per unit time.
  kTimeCost,
};

inline constexpr std::size_t kBusStops = 5;
inline constexpr std::size_t kBusIntensities = 3;
inline constexpr double kBusResetTime = 455.0;

/// Index of bus state (stop, intensity) with intensity in {0: low, 1: medium, 2: high}.
constexpr std::size_t bus_state(std::size_t stop, std::size_t intensity) {
  return stop * kBusIntensities + intensity;
}

/// Mixed-observable bus/bike commute: five stops (observed) by three traffic
/// intensities (hidden). Bus legs have inverse-Gaussian sojourns with
/// lambda = 10 mu^2; bike rides and the reset from the last stop are atoms.
PosmdpModel build_bus_problem(BusRewards rewards = BusRewards::kGoal);

/// Water-filter maintenance with four hidden filter conditions, four actions
/// and turbidity observations discretized into `observation_bins` points.
PosmdpModel build_maintenance_problem(std::size_t observation_bins = 100);

/// Constant initial alpha entry used for the maintenance problem in place of
/// the minimum-reward construction, which is undefined there.
inline constexpr double kMaintenanceInitialAlpha = -1.0e6;

/// Reference beliefs over (good, acceptable, poor, awful) with the expected
/// optimal action (0-based) and value for each.
struct ReferenceBelief {
  std::vector<double> belief;
  std::size_t action;
  double value;
};
std::vector<ReferenceBelief> maintenance_reference_beliefs();

}  // namespace chronos
