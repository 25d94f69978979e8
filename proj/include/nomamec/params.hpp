#pragma once

#include <cmath>

#include "nomamec/error.hpp"

namespace nomamec {

/// Radio and deadline constants shared by every link of an instance.
/// All quantities are SI except the noise spectral density, which is in dBm/Hz.
struct SystemParams {
  double bandwidth_hz = 1e9;
  double noise_psd_dbm_hz = -174.0;
  double path_loss_exp = 3.76;
  double outage_eps = 0.1;
  double t_max_s = 0.01;
  double p_max_w = 0.01;

  /// Noise power in watts over the whole band, B * 10^((N0 - 30) / 10).
  double noise_power() const {
    return bandwidth_hz * std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0);
  }

  void validate() const {
    detail::require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
    detail::require(std::isfinite(noise_psd_dbm_hz), "noise_psd_dbm_hz must be finite");
    detail::require(path_loss_exp > 0.0, "path_loss_exp must be positive");
    detail::require(outage_eps > 0.0 && outage_eps < 1.0, "outage_eps must lie in (0, 1)");
    detail::require(t_max_s > 0.0, "t_max_s must be positive");
    detail::require(p_max_w > 0.0, "p_max_w must be positive");
  }
};

/// A divisible task: input size and CPU cycles needed per bit.
struct TaskProfile {
  double bits = 3.2e7;
  double cycles_per_bit = 1e3;

  void validate() const {
    detail::require(bits > 0.0, "task bits must be positive");
    detail::require(cycles_per_bit > 0.0, "cycles_per_bit must be positive");
  }
};

/// MEC server attached to a base station.
struct ServerProfile {
  double kappa = 1e-28;  // effective switched capacitance
  double cpu_hz = 1e9;

  void validate() const {
    detail::require(kappa > 0.0, "server kappa must be positive");
    detail::require(cpu_hz > 0.0, "server cpu_hz must be positive");
  }

  /// Energy to execute the whole task on this server.
  double full_task_energy(const TaskProfile& task) const {
    return kappa * task.bits * task.cycles_per_bit * cpu_hz * cpu_hz;
  }
};

}  // namespace nomamec
