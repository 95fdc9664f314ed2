#pragma once

#include <optional>

#include "stereosnn/events.hpp"

// Closed-form current-based LIF dynamics between input events:
//   tau_m dV/dt = -V + I,   tau_s dI/dt = -I.
// All offsets are in microseconds.
namespace stereosnn::lif {

double current_at(double i0, double s, double tau_s);

// Membrane potential s us after a state (v0, i0), without further input.
// Stable for tau_m == tau_s and for nearly equal time constants.
double membrane_at(double v0, double i0, double s, double tau_m, double tau_s);

// Peak of the PSP produced by a unit current step on a resting neuron.
double unit_psp_peak(double tau_m, double tau_s);

// Offset of the peak of that PSP.
double unit_psp_peak_time(double tau_m, double tau_s);

// Smallest integer offset s >= 0 at which V(s) >= threshold, if any.
std::optional<Timestamp> first_crossing(double v0, double i0, double threshold,
                                        double tau_m, double tau_s);

// Largest inter-arrival gap for which two PSPs of peak `weight` on a resting
// neuron reach `threshold`. Returns nullopt when even simultaneous arrival
// stays below threshold.
std::optional<Timestamp> max_coincidence_interval(double weight, double threshold,
                                                  double tau_m, double tau_s);

// Upper bound on the membrane potential of a resting neuron driven by any
// input train whose arrivals are at least `spacing` apart, each producing a
// PSP of peak `weight`. Bounds the monocular drive of coincidence neurons.
double periodic_train_peak(double weight, Timestamp spacing, double tau_m,
                           double tau_s);

}  // namespace stereosnn::lif
