// Copyright 2026 The BranchLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "branchlab/datagen.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>

#include "branchlab/policies.hpp"
#include "branchlab/rng.hpp"
#include "json.hpp"

namespace branchlab {

std::uint64_t CollectionConfig::digest() const {
  std::ostringstream key;
  key.precision(17);
  key << time_limit << '|' << p_sb << '|' << target_samples << '|' << seed
      << '|' << static_cast<int>(clock) << '|' << seconds_per_node << '|'
      << node_limit << '|' << max_passes;
  const std::string s = key.str();
  return fnv1a64(s.data(), s.size());
}

namespace {

// Pseudocost branching with an expert query at each node with probability
// p_sb. Expert nodes are recorded and the expert's choice is executed.
class Collector : public BranchingController {
 public:
  Collector(const CollectionConfig& config, std::uint64_t coin_seed, int pass,
            ExecMode sb_mode)
      : config_(config), coin_(coin_seed), pass_(pass) {
    sb_options_.mode = sb_mode;
  }

  std::string name() const override { return "collector"; }

  void begin_episode(const Episode& episode) override {
    store_ = PseudocostStore(episode.instance().num_vars());
  }

  int choose(Episode& episode, const Observation& observation) override {
    ++visits_;
    const bool expert = uniform01(coin_) < config_.p_sb;
    int action;
    if (expert) {
      ++expert_visits_;
      const ScoredCandidates scored = reliability_scores(
          episode.instance(), episode.focus_bounds(), episode.focus().lp,
          observation.candidates, store_,
          std::numeric_limits<std::int64_t>::max(), sb_options_);
      action = scored.chosen();
      Sample sample;
      sample.state = extract_state(episode.instance(), episode.focus_bounds(),
                                   episode.focus().lp, episode.stats());
      sample.candidates = scored.indices;
      sample.expert_action = action;
      sample.sb_scores = scored.scores;
      sample.provenance = {episode.instance().name(), observation.focus_node_id,
                           config_.digest()};
      samples_.push_back(std::move(sample));
    } else {
      action = pseudocost_scores(episode.focus().lp, observation.candidates,
                                 store_)
                   .chosen();
    }
    if (config_.trace != nullptr) {
      nlohmann::json j;
      j["instance"] = episode.instance().name();
      j["pass"] = pass_;
      j["node"] = observation.focus_node_id;
      j["expert"] = expert;
      trace_ += j.dump() + "\n";
    }
    return action;
  }

  void observe(const Episode& episode) override {
    if (episode.last_branching()) {
      update_from_branching(store_, *episode.last_branching());
    }
  }

  std::vector<Sample> samples_;
  std::uint64_t visits_ = 0;
  std::uint64_t expert_visits_ = 0;
  std::string trace_;

 private:
  const CollectionConfig& config_;
  Rng coin_;
  int pass_;
  StrongBranchingOptions sb_options_;
  PseudocostStore store_;
};

struct EpisodeOutput {
  std::vector<Sample> samples;
  std::uint64_t visits = 0;
  std::uint64_t expert_visits = 0;
  std::string trace;
};

}  // namespace

Dataset collect(const std::vector<MilpInstance>& instances,
                const CollectionConfig& config) {
  if (!(config.p_sb >= 0.0 && config.p_sb <= 1.0)) {
    throw InvalidArgument("p_sb must lie in [0, 1]");
  }
  if (config.target_samples < 1) throw InvalidArgument("target_samples must be at least 1");
  if (config.max_passes < 1 || config.block_size < 1) {
    throw InvalidArgument("max_passes and block_size must be positive");
  }
  if (!(config.time_limit >= 0.0)) throw InvalidArgument("time_limit must be non-negative");
  if (instances.empty()) throw InvalidArgument("no instances to collect from");
  if (config.p_sb == 0.0) {
    throw Error("empty dataset: p_sb = 0 never queries the expert");
  }

  Dataset dataset;
  dataset.meta.time_limit = config.time_limit;
  dataset.meta.p_sb = config.p_sb;
  dataset.meta.target = config.target_samples;
  dataset.meta.seed = config.seed;
  dataset.meta.config_digest = config.digest();

  std::vector<Sample> all;
  const std::size_t n = instances.size();
  const bool parallel_episodes = config.mode == ExecMode::kParallel;
  // With p_sb = 1 an episode never draws from its coin, so later passes
  // would replay the first one.
  const int passes = config.p_sb == 1.0 ? 1 : config.max_passes;
  for (int pass = 0; pass < passes && all.size() < config.target_samples; ++pass) {
    for (std::size_t begin = 0; begin < n && all.size() < config.target_samples;
         begin += config.block_size) {
      const std::size_t end = std::min(n, begin + config.block_size);
      std::vector<EpisodeOutput> outputs(end - begin);
      std::exception_ptr error;
      const auto count = static_cast<std::ptrdiff_t>(end - begin);
#pragma omp parallel for schedule(dynamic) if (parallel_episodes)
      for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
          const std::size_t i = begin + static_cast<std::size_t>(k);
          const std::uint64_t episode_seed =
              mix_seed(config.seed, static_cast<std::uint64_t>(pass) * n + i);
          Collector collector(config, episode_seed,
                              pass, parallel_episodes ? ExecMode::kSerial
                                                      : ExecMode::kParallel);
          EpisodeConfig ec;
          ec.time_limit = config.time_limit;
          ec.clock = config.clock;
          ec.seconds_per_node = config.seconds_per_node;
          ec.seed = episode_seed;
          if (config.node_limit > 0) ec.node_limit = config.node_limit;
          run_episode(instances[i], ec, collector);
          outputs[k] = {std::move(collector.samples_), collector.visits_,
                        collector.expert_visits_, std::move(collector.trace_)};
        } catch (...) {
#pragma omp critical(branchlab_collect_error)
          if (!error) error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);
      // Ordered merge: instance order within the block, node order within an
      // episode.
      for (EpisodeOutput& out : outputs) {
        if (all.size() >= config.target_samples) break;
        dataset.meta.node_visits += out.visits;
        dataset.meta.expert_visits += out.expert_visits;
        if (config.trace != nullptr) *config.trace << out.trace;
        for (Sample& s : out.samples) all.push_back(std::move(s));
      }
    }
  }
  if (all.empty()) {
    throw Error("empty dataset: no branching node was reached on any instance");
  }
  if (all.size() > config.target_samples) all.resize(config.target_samples);

  Rng rng(mix_seed(config.seed, 0x53504c4954ULL));
  shuffle(all, rng);
  const std::size_t valid = all.size() >= 2 ? std::max<std::size_t>(1, all.size() / 100) : 0;
  dataset.valid.assign(std::make_move_iterator(all.end() - valid),
                       std::make_move_iterator(all.end()));
  all.resize(all.size() - valid);
  dataset.train = std::move(all);
  return dataset;
}

std::size_t candidate_rank(std::span<const double> logits,
                           const std::vector<int>& candidates, int action) {
  const double za = logits[action];
  std::size_t rank = 0;
  for (int j : candidates) {
    if (logits[j] > za || (logits[j] == za && j < action)) ++rank;
  }
  return rank;
}

std::vector<double> top_k_accuracy(const GcnnParams& params,
                                   const std::vector<Sample>& samples,
                                   const std::vector<int>& ks, ExecMode mode) {
  if (samples.empty()) throw InvalidArgument("top-k accuracy of an empty sample set");
  std::vector<std::size_t> ranks(samples.size());
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::kParallel)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      const Sample& s = samples[k];
      const std::vector<double> logits = forward(s.state, params);
      ranks[k] = candidate_rank(logits, s.candidates, s.expert_action);
    } catch (...) {
#pragma omp critical(branchlab_topk_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  std::vector<double> out;
  for (int k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : ranks) hits += r < static_cast<std::size_t>(std::max(k, 0)) ? 1 : 0;
    out.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size()));
  }
  return out;
}

}  // namespace branchlab
