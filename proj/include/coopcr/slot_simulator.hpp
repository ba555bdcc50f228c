#pragma once

// Slot-level Monte Carlo simulation of the cooperation policy.
//
// Within a slot, transmissions act on the start-of-slot queue contents and the
// slot's arrivals are appended afterwards, so a packet arriving in slot t is
// first eligible in slot t+1. A packet stamped t that departs in slot d has
// delay d - t. Relayed PU packets keep their original stamp.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coopcr/rng.hpp"
#include "coopcr/types.hpp"

namespace coopcr {

// One uniform variate per random event, drawn every slot in this order
// whether or not the event is consulted.
struct SlotDraws {
  double pu_arrival = 1;
  double su_arrival = 1;
  double pu_to_dest = 1;  // destination decodes the PU transmission
  double pu_to_su = 1;    // SU overhears the PU transmission
  double admit = 1;
  double select = 1;      // SU picks its own queue
  double su_to_dest = 1;  // destination decodes the SU transmission

  static SlotDraws from(UniformSource& u) {
    SlotDraws d;
    d.pu_arrival = u.next();
    d.su_arrival = u.next();
    d.pu_to_dest = u.next();
    d.pu_to_su = u.next();
    d.admit = u.next();
    d.select = u.next();
    d.su_to_dest = u.next();
    return d;
  }
};

struct SimState {
  std::deque<std::int64_t> q_p;   // arrival slots of queued PU packets
  std::deque<std::int64_t> q_sp;  // relayed PU packets, original PU stamps
  std::deque<std::int64_t> q_s;
  std::int64_t slot = 0;
};

// What happened in one slot.
struct SlotEvents {
  bool pu_transmitted = false;
  bool pu_direct = false;       // destination decoded the PU packet
  bool relay_eligible = false;  // destination failed, SU decoded
  bool relay_admitted = false;
  bool su_access = false;       // PU idle, SU owns the slot
  bool selected_own = false;    // SU picked Q_s
  bool wasted = false;          // selected queue empty
  bool su_departed = false;
  bool relay_departed = false;
  bool pu_arrival = false;
  bool su_arrival = false;
  std::optional<std::int64_t> pu_delay;  // set when a PU packet leaves the system
  std::optional<std::int64_t> pu_stamp;
  std::optional<std::int64_t> su_delay;
  std::optional<std::int64_t> su_stamp;
};

// Advances state by one slot. Total function of its inputs.
inline SlotEvents step(SimState& s, const SlotDraws& d, const NetworkParams& p, const Policy& pol) {
  SlotEvents ev;
  const std::int64_t t = s.slot;

  if (!s.q_p.empty()) {
    ev.pu_transmitted = true;
    const bool dest_ok = d.pu_to_dest < p.h_pd;
    const bool su_ok = d.pu_to_su < p.h_ps;
    if (dest_ok) {
      ev.pu_direct = true;
      ev.pu_stamp = s.q_p.front();
      ev.pu_delay = t - s.q_p.front();
      s.q_p.pop_front();
    } else if (su_ok) {
      ev.relay_eligible = true;
      if (d.admit < pol.a) {
        ev.relay_admitted = true;
        s.q_sp.push_back(s.q_p.front());
        s.q_p.pop_front();
      }
    }
  } else {
    ev.su_access = true;
    ev.selected_own = d.select < pol.b;
    auto& q = ev.selected_own ? s.q_s : s.q_sp;
    if (q.empty()) {
      ev.wasted = !s.q_s.empty() || !s.q_sp.empty();
    } else if (d.su_to_dest < p.h_sd) {
      const std::int64_t stamp = q.front();
      q.pop_front();
      if (ev.selected_own) {
        ev.su_departed = true;
        ev.su_stamp = stamp;
        ev.su_delay = t - stamp;
      } else {
        ev.relay_departed = true;
        ev.pu_stamp = stamp;
        ev.pu_delay = t - stamp;
      }
    }
  }

  if (d.pu_arrival < p.lambda_p) {
    ev.pu_arrival = true;
    s.q_p.push_back(t);
  }
  if (d.su_arrival < p.lambda_s) {
    ev.su_arrival = true;
    s.q_s.push_back(t);
  }
  ++s.slot;
  return ev;
}

struct SimConfig {
  NetworkParams params;
  Policy policy;
  std::int64_t horizon = 100000;
  std::optional<std::int64_t> warmup;  // default: 10% of horizon
  std::uint64_t seed = 1;

  std::int64_t effective_warmup() const { return warmup ? *warmup : horizon / 10; }

  void validate() const {
    const auto w = effective_warmup();
    if (w < 0 || !(horizon > w)) throw std::invalid_argument("need horizon > warmup >= 0");
  }
};

// Delay statistics cover packets arriving at or after the warmup slot and
// departing within the horizon. Throughput and mean lengths are averaged over
// the post-warmup slots. Counts without a qualifier cover the whole run.
struct SimReport {
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  std::uint64_t seed = 0;

  double pu_delay_mean = std::numeric_limits<double>::quiet_NaN();
  double pu_delay_stderr = std::numeric_limits<double>::quiet_NaN();
  std::int64_t pu_delay_samples = 0;
  double su_delay_mean = std::numeric_limits<double>::quiet_NaN();
  double su_delay_stderr = std::numeric_limits<double>::quiet_NaN();
  std::int64_t su_delay_samples = 0;
  double su_throughput = 0;
  double pu_throughput = 0;

  double mean_len_p = 0;
  double mean_len_sp = 0;
  double mean_len_s = 0;

  std::int64_t pu_arrivals = 0;
  std::int64_t su_arrivals = 0;
  std::int64_t pu_departed = 0;  // direct plus relayed
  std::int64_t su_departed = 0;
  std::int64_t relay_departed = 0;
  std::int64_t relay_admissions = 0;
  std::int64_t wasted_slots = 0;

  std::int64_t pu_tx_slots = 0;
  std::int64_t pu_direct_successes = 0;
  std::int64_t relay_eligible = 0;
  std::int64_t su_access_slots = 0;
  std::int64_t su_selected_own = 0;

  std::int64_t final_len_p = 0;
  std::int64_t final_len_sp = 0;
  std::int64_t final_len_s = 0;
};

namespace detail {

// Mean and batch-means standard error, batching by arrival slot.
class DelayAccumulator {
public:
  DelayAccumulator(std::int64_t first, std::int64_t last, int batches)
      : first_(first), span_(last - first), sums_(batches, 0.0), counts_(batches, 0) {}

  void add(std::int64_t stamp, std::int64_t delay) {
    if (stamp < first_) return;
    auto k = static_cast<std::size_t>((stamp - first_) * static_cast<std::int64_t>(sums_.size()) / span_);
    if (k >= sums_.size()) k = sums_.size() - 1;
    sums_[k] += static_cast<double>(delay);
    ++counts_[k];
    total_ += static_cast<double>(delay);
    ++n_;
  }

  std::int64_t samples() const { return n_; }
  double mean() const {
    return n_ ? total_ / static_cast<double>(n_) : std::numeric_limits<double>::quiet_NaN();
  }
  double stderr_of_mean() const {
    std::vector<double> means;
    for (std::size_t k = 0; k < sums_.size(); ++k)
      if (counts_[k] > 0) means.push_back(sums_[k] / static_cast<double>(counts_[k]));
    if (means.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double m = 0;
    for (double x : means) m += x;
    m /= static_cast<double>(means.size());
    double ss = 0;
    for (double x : means) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(means.size() - 1);
    return std::sqrt(var / static_cast<double>(means.size()));
  }

private:
  std::int64_t first_;
  std::int64_t span_;
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
  double total_ = 0;
  std::int64_t n_ = 0;
};

}  // namespace detail

inline constexpr int kDelayBatches = 20;

// Deterministic given cfg. Unstable configurations are not an error: the
// final queue lengths show the divergence.
inline SimReport run(const SimConfig& cfg) {
  cfg.validate();
  const auto warmup = cfg.effective_warmup();
  const auto& p = cfg.params;
  const auto& pol = cfg.policy;

  SimReport r;
  r.slots = cfg.horizon;
  r.warmup = warmup;
  r.seed = cfg.seed;

  UniformSource rng(cfg.seed);
  SimState s;
  detail::DelayAccumulator pu(warmup, cfg.horizon, kDelayBatches);
  detail::DelayAccumulator su(warmup, cfg.horizon, kDelayBatches);
  double len_p = 0, len_sp = 0, len_s = 0;
  std::int64_t pu_out_measured = 0, su_out_measured = 0;

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    const bool measured = t >= warmup;
    if (measured) {
      len_p += static_cast<double>(s.q_p.size());
      len_sp += static_cast<double>(s.q_sp.size());
      len_s += static_cast<double>(s.q_s.size());
    }
    const SlotEvents ev = step(s, SlotDraws::from(rng), p, pol);

    r.pu_arrivals += ev.pu_arrival;
    r.su_arrivals += ev.su_arrival;
    r.pu_tx_slots += ev.pu_transmitted;
    r.pu_direct_successes += ev.pu_direct;
    r.relay_eligible += ev.relay_eligible;
    r.relay_admissions += ev.relay_admitted;
    r.su_access_slots += ev.su_access;
    r.su_selected_own += ev.su_access && ev.selected_own;
    r.wasted_slots += ev.wasted;
    r.relay_departed += ev.relay_departed;
    if (ev.pu_delay) {
      ++r.pu_departed;
      pu_out_measured += measured;
      pu.add(*ev.pu_stamp, *ev.pu_delay);
    }
    if (ev.su_delay) {
      ++r.su_departed;
      su_out_measured += measured;
      su.add(*ev.su_stamp, *ev.su_delay);
    }
  }

  const auto window = static_cast<double>(cfg.horizon - warmup);
  r.mean_len_p = len_p / window;
  r.mean_len_sp = len_sp / window;
  r.mean_len_s = len_s / window;
  r.su_throughput = static_cast<double>(su_out_measured) / window;
  r.pu_throughput = static_cast<double>(pu_out_measured) / window;
  r.pu_delay_mean = pu.mean();
  r.pu_delay_stderr = pu.stderr_of_mean();
  r.pu_delay_samples = pu.samples();
  r.su_delay_mean = su.mean();
  r.su_delay_stderr = su.stderr_of_mean();
  r.su_delay_samples = su.samples();
  r.final_len_p = static_cast<std::int64_t>(s.q_p.size());
  r.final_len_sp = static_cast<std::int64_t>(s.q_sp.size());
  r.final_len_s = static_cast<std::int64_t>(s.q_s.size());
  return r;
}

}  // namespace coopcr
