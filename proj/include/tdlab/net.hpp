#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tdlab/transforms.hpp"

namespace tdlab {

// Gradient of one output head with respect to the flat parameter vector,
// stored as a full-length buffer plus the sorted, disjoint index ranges
// that were written. Entries outside the spans are stale and must be read
// as zero. Reused across steps to avoid reallocation.
struct GradBuffer {
  std::vector<double> values;
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;

  void reset(std::int64_t num_params) {
    values.resize(static_cast<std::size_t>(num_params));
    spans.clear();
  }
  std::vector<double> to_flat() const;
  double dot_flat(const std::vector<double>& w) const;
};

struct InitSpec {
  double weight_std = 0.5;
  double bias_std = 0.1;
  std::uint64_t seed = 0;
  // Input indices whose first-layer weights are forced nonnegative, so
  // that every hidden hyperplane points upward along those coordinates.
  std::vector<int> upward_dims;
};

// Parametric value function over feature vectors. A single head for
// prediction, one head per action for control. Owns the flat parameter
// vector; the learner mutates it in place through params().
class Approximator {
 public:
  virtual ~Approximator() = default;
  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int num_outputs() const = 0;
  virtual std::int64_t num_params() const = 0;
  virtual std::vector<double>& params() = 0;
  virtual const std::vector<double>& params() const = 0;
  virtual double value(const FeatureVector& x, int head = 0) const = 0;
  virtual std::vector<double> values(const FeatureVector& x) const = 0;
  // Fills g with the exact gradient of head's output at x and returns that
  // output. ReLU subgradient at exactly zero is taken as zero.
  virtual double gradient(const FeatureVector& x, int head, GradBuffer& g) const = 0;
  virtual void save(std::ostream& out) const = 0;
};

std::unique_ptr<Approximator> load_approximator(std::istream& in);

// One hidden ReLU layer, linear multi-head output:
//   hidden = max(0, W1 x + b1), outputs = W2 hidden + b2.
// W1 is stored column-major in the flat vector so that a sparse binary
// input touches contiguous runs; checkpoints use row-major W1 as the
// declared external layout. Flat layout: [W1 | b1 | W2 row-major | b2].
class ReluNet final : public Approximator {
 public:
  ReluNet(int in, int hidden, int out);
  static ReluNet init(int in, int hidden, int out, const InitSpec& spec);

  std::string kind() const override { return "relu_net"; }
  int input_dim() const override { return in_; }
  int hidden_dim() const { return hidden_; }
  int num_outputs() const override { return out_; }
  std::int64_t num_params() const override;
  std::vector<double>& params() override { return w_; }
  const std::vector<double>& params() const override { return w_; }

  double value(const FeatureVector& x, int head = 0) const override;
  std::vector<double> values(const FeatureVector& x) const override;
  double gradient(const FeatureVector& x, int head, GradBuffer& g) const override;
  void save(std::ostream& out) const override;

  // pre-ReLU activations W1 x + b1
  std::vector<double> preactivations(const FeatureVector& x) const;
  std::vector<double> hidden_activations(const FeatureVector& x) const;
  double node_response(int node_index, const FeatureVector& x) const;

  // offsets into the flat parameter vector
  std::int64_t w1_index(int node, int input) const { return static_cast<std::int64_t>(input) * hidden_ + node; }
  std::int64_t b1_index(int node) const { return b1_off_ + node; }
  std::int64_t w2_index(int head, int node) const { return w2_off_ + static_cast<std::int64_t>(head) * hidden_ + node; }
  std::int64_t b2_index(int head) const { return b2_off_ + head; }

 private:
  int in_, hidden_, out_;
  std::int64_t b1_off_, w2_off_, b2_off_;
  std::vector<double> w_;
};

// Linear map over features, one weight row per head, no bias: with binary
// codes a constant number of features is always active, so a bias would be
// redundant. Flat layout: W row-major (head-major).
class LinearModel final : public Approximator {
 public:
  LinearModel(int features, int out);

  std::string kind() const override { return "linear"; }
  int input_dim() const override { return features_; }
  int num_outputs() const override { return out_; }
  std::int64_t num_params() const override { return static_cast<std::int64_t>(features_) * out_; }
  std::vector<double>& params() override { return w_; }
  const std::vector<double>& params() const override { return w_; }

  double value(const FeatureVector& x, int head = 0) const override;
  std::vector<double> values(const FeatureVector& x) const override;
  double gradient(const FeatureVector& x, int head, GradBuffer& g) const override;
  void save(std::ostream& out) const override;

  std::int64_t weight_index(int head, int feature) const {
    return static_cast<std::int64_t>(head) * features_ + feature;
  }

 private:
  int features_, out_;
  std::vector<double> w_;
};

}  // namespace tdlab
