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


#include <cmath>

#include "branchlab/datagen.hpp"
#include "branchlab/gcnn.hpp"
#include "branchlab/rng.hpp"

namespace branchlab {

namespace {

void validate(const Dataset& dataset, const TrainConfig& c) {
  if (c.batch_size < 1 || c.max_epochs < 1 || c.plateau_patience < 1 ||
      c.early_stop < 1 || c.h < 1) {
    throw InvalidArgument("training sizes and patience values must be positive");
  }
  if (!(c.lr >= 0.0) || !(c.decay > 0.0 && c.decay <= 1.0)) {
    throw InvalidArgument("lr must be non-negative and decay in (0, 1]");
  }
  if (dataset.train.size() < static_cast<std::size_t>(c.batch_size)) {
    throw InvalidArgument("training split is smaller than one batch");
  }
}

std::vector<const Sample*> pointers(const std::vector<Sample>& samples) {
  std::vector<const Sample*> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(&s);
  return out;
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  validate(dataset, config);
  GcnnParams start = init_params({config.h}, config.seed);
  std::vector<const BipartiteState*> states;
  for (const Sample& s : dataset.train) states.push_back(&s.state);
  start.prenorm = Prenorm::fit(states);
  return train_from(dataset, config, std::move(start));
}

TrainResult train_from(const Dataset& dataset, const TrainConfig& config,
                       GcnnParams start) {
  validate(dataset, config);
  if (start.h != config.h) throw InvalidArgument("start parameters have a different h");
  const bool has_valid = !dataset.valid.empty();
  const auto train_set = pointers(dataset.train);
  const auto valid_set = pointers(has_valid ? dataset.valid : dataset.train);
  const std::vector<Sample>& valid_samples = has_valid ? dataset.valid : dataset.train;

  TrainResult result;
  GcnnParams params = std::move(start);
  result.params = params;
  const std::size_t dim = params.values.size();
  std::vector<double> m1(dim, 0.0), m2(dim, 0.0);
  std::int64_t step = 0;
  double lr = config.lr;
  double best = kInf;
  int stagnant = 0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<const Sample*> batch;
      for (std::size_t k = begin; k < end; ++k) batch.push_back(train_set[order[k]]);
      const LossAndGrads lg = loss_and_grads(batch, params);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < dim; ++i) {
        const double g = lg.grads[i];
        m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * g;
        m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * g * g;
        params.values[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.adam_eps);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.valid_loss = batch_loss(valid_set, params);
    rec.lr = lr;
    const auto topk = top_k_accuracy(params, valid_samples, {1, 3, 5, 10});
    std::copy(topk.begin(), topk.end(), rec.valid_topk.begin());
    result.history.push_back(rec);

    if (rec.valid_loss < best) {
      best = rec.valid_loss;
      stagnant = 0;
      result.params = params;
      result.best_epoch = epoch;
    } else {
      ++stagnant;
      if (stagnant >= config.early_stop) break;
      if (stagnant % config.plateau_patience == 0) lr *= config.decay;
    }
  }
  return result;
}

}  // namespace branchlab
