//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Training hyperparameters with a JSON round trip. Defaults follow the
// reference configuration: discount 0.99, KL weight 1e-5, Huber delta 1,
// horizon 20, 8 episodes per buffer refresh, loss batches of 128, hard
// target-network sync every 1000 optimizer steps, and the standard learning
// rate / exploration schedules.

#ifndef MOLRL_TRAIN_CONFIG_HPP_
#define MOLRL_TRAIN_CONFIG_HPP_

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "molrl/nn/adam.hpp"

namespace molrl {

struct TrainConfig {
  double gamma = 0.99;
  double lambda = 1e-5;
  double huber_delta = 1.0;
  int horizon = 20;
  int episode_batch = 8;
  int loss_batch = 128;
  int target_sync = 1000;
  std::size_t buffer_capacity = 10000;
  std::size_t buffer_warmup = 1000;
  ExpSchedule lr = default_lr_schedule();
  ExpSchedule eps = default_eps_schedule();
  int checkpoint_every = 0;  // 0: initial and final checkpoints only

  void validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma outside [0, 1]");
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be non-negative");
    if (huber_delta <= 0.0) throw std::invalid_argument("config: huber_delta must be positive");
    if (horizon <= 0) throw std::invalid_argument("config: horizon must be positive");
    if (episode_batch <= 0) throw std::invalid_argument("config: episode_batch must be positive");
    if (loss_batch <= 0) throw std::invalid_argument("config: loss_batch must be positive");
    if (target_sync <= 0) throw std::invalid_argument("config: target_sync must be positive");
    if (buffer_capacity == 0) throw std::invalid_argument("config: buffer_capacity must be positive");
    if (buffer_warmup > buffer_capacity) {
      throw std::invalid_argument("config: buffer_warmup exceeds buffer_capacity");
    }
    if (lr.base <= 0.0 || lr.rate <= 0.0 || lr.rate > 1.0 || lr.interval <= 0.0 ||
        eps.base <= 0.0 || eps.rate <= 0.0 || eps.rate > 1.0 || eps.interval <= 0.0) {
      throw std::invalid_argument("config: schedules must be positive and non-increasing");
    }
    if (checkpoint_every < 0) throw std::invalid_argument("config: checkpoint_every must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const ExpSchedule& s) {
  j = {{"base", s.base}, {"rate", s.rate}, {"interval", s.interval}};
}

inline void from_json(const nlohmann::json& j, ExpSchedule& s) {
  j.at("base").get_to(s.base);
  j.at("rate").get_to(s.rate);
  j.at("interval").get_to(s.interval);
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"gamma", c.gamma},
       {"lambda", c.lambda},
       {"huber_delta", c.huber_delta},
       {"horizon", c.horizon},
       {"episode_batch", c.episode_batch},
       {"loss_batch", c.loss_batch},
       {"target_sync", c.target_sync},
       {"buffer_capacity", c.buffer_capacity},
       {"buffer_warmup", c.buffer_warmup},
       {"lr", c.lr},
       {"eps", c.eps},
       {"checkpoint_every", c.checkpoint_every}};
}

// Missing keys keep their defaults so config files can state only overrides;
// unknown keys are rejected to catch typos.
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const char* known[] = {"gamma",         "lambda",          "huber_delta",
                                "horizon",       "episode_batch",   "loss_batch",
                                "target_sync",   "buffer_capacity", "buffer_warmup",
                                "lr",            "eps",             "checkpoint_every"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }
  c.gamma = j.value("gamma", c.gamma);
  c.lambda = j.value("lambda", c.lambda);
  c.huber_delta = j.value("huber_delta", c.huber_delta);
  c.horizon = j.value("horizon", c.horizon);
  c.episode_batch = j.value("episode_batch", c.episode_batch);
  c.loss_batch = j.value("loss_batch", c.loss_batch);
  c.target_sync = j.value("target_sync", c.target_sync);
  c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
  c.buffer_warmup = j.value("buffer_warmup", c.buffer_warmup);
  if (j.contains("lr")) j.at("lr").get_to(c.lr);
  if (j.contains("eps")) j.at("eps").get_to(c.eps);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  is >> j;
  TrainConfig c = j.get<TrainConfig>();
  c.validate();
  return c;
}

inline void save_train_config(const TrainConfig& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot open " + path + " for writing");
  os << nlohmann::json(c).dump(2) << "\n";
}

}  // namespace molrl

#endif  // MOLRL_TRAIN_CONFIG_HPP_
