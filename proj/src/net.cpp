#include "tdlab/net.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tdlab/kernels.hpp"
#include "tdlab/rng.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian doubles");

namespace tdlab {

namespace {

void write_block(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_block(std::istream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint truncated");
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated at " + key);
  if (line.rfind(key, 0) != 0) throw std::runtime_error("checkpoint: expected '" + key + "', got '" + line + "'");
  std::string rest = line.substr(key.size());
  if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
  return rest;
}

}  // namespace

// ----------------------------------------------------------------- GradBuffer

std::vector<double> GradBuffer::to_flat() const {
  std::vector<double> out(values.size(), 0.0);
  for (const auto& [b, e] : spans) {
    std::copy(values.begin() + b, values.begin() + e, out.begin() + b);
  }
  return out;
}

double GradBuffer::dot_flat(const std::vector<double>& w) const {
  double acc = 0.0;
  for (const auto& [b, e] : spans) {
    acc += kernels::dot(values.data() + b, w.data() + b, static_cast<std::size_t>(e - b));
  }
  return acc;
}

// -------------------------------------------------------------------- ReluNet

ReluNet::ReluNet(int in, int hidden, int out) : in_(in), hidden_(hidden), out_(out) {
  if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("layer sizes must be positive");
  b1_off_ = static_cast<std::int64_t>(in_) * hidden_;
  w2_off_ = b1_off_ + hidden_;
  b2_off_ = w2_off_ + static_cast<std::int64_t>(out_) * hidden_;
  w_.assign(static_cast<std::size_t>(num_params()), 0.0);
}

std::int64_t ReluNet::num_params() const {
  return static_cast<std::int64_t>(in_) * hidden_ + hidden_ + static_cast<std::int64_t>(out_) * hidden_ + out_;
}

ReluNet ReluNet::init(int in, int hidden, int out, const InitSpec& spec) {
  ReluNet net(in, hidden, out);
  for (int d : spec.upward_dims) {
    if (d < 0 || d >= in) throw std::invalid_argument("upward dimension out of range");
  }
  Rng rng(spec.seed);
  auto& w = net.w_;
  for (std::int64_t i = 0; i < net.b1_off_; ++i) w[i] = spec.weight_std * rng.normal();
  for (int h = 0; h < hidden; ++h) w[net.b1_index(h)] = spec.bias_std * rng.normal();
  for (std::int64_t i = net.w2_off_; i < net.b2_off_; ++i) w[i] = spec.weight_std * rng.normal();
  for (int o = 0; o < out; ++o) w[net.b2_index(o)] = spec.bias_std * rng.normal();
  for (int d : spec.upward_dims) {
    double* col = w.data() + net.w1_index(0, d);
    for (int h = 0; h < hidden; ++h) col[h] = std::abs(col[h]);
  }
  return net;
}

std::vector<double> ReluNet::preactivations(const FeatureVector& x) const {
  if (x.length != in_) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> pre(w_.begin() + b1_off_, w_.begin() + b1_off_ + hidden_);
  const std::size_t h = static_cast<std::size_t>(hidden_);
  if (x.is_sparse) {
    for (auto i : x.active) kernels::add(w_.data() + w1_index(0, i), pre.data(), h);
  } else {
    for (int i = 0; i < in_; ++i) {
      if (x.dense[i] != 0.0) kernels::axpy(x.dense[i], w_.data() + w1_index(0, i), pre.data(), h);
    }
  }
  return pre;
}

std::vector<double> ReluNet::hidden_activations(const FeatureVector& x) const {
  std::vector<double> pre = preactivations(x);
  kernels::relu(pre.data(), pre.data(), pre.size());
  return pre;
}

double ReluNet::node_response(int node_index, const FeatureVector& x) const {
  if (node_index < 0 || node_index >= hidden_) throw std::out_of_range("node index out of range");
  return hidden_activations(x)[node_index];
}

double ReluNet::value(const FeatureVector& x, int head) const {
  if (head < 0 || head >= out_) throw std::out_of_range("head out of range");
  const std::vector<double> hidden = hidden_activations(x);
  return kernels::dot(w_.data() + w2_index(head, 0), hidden.data(), hidden.size()) + w_[b2_index(head)];
}

std::vector<double> ReluNet::values(const FeatureVector& x) const {
  const std::vector<double> hidden = hidden_activations(x);
  std::vector<double> out(out_);
  for (int o = 0; o < out_; ++o) {
    out[o] = kernels::dot(w_.data() + w2_index(o, 0), hidden.data(), hidden.size()) + w_[b2_index(o)];
  }
  return out;
}

double ReluNet::gradient(const FeatureVector& x, int head, GradBuffer& g) const {
  if (head < 0 || head >= out_) throw std::out_of_range("head out of range");
  g.reset(num_params());
  const std::size_t h = static_cast<std::size_t>(hidden_);
  const std::vector<double> pre = preactivations(x);

  // d output / d preactivation per hidden node; zero where the gate is
  // closed (and exactly at zero)
  std::vector<double> deriv(h);
  std::vector<double> hidden(h);
  const double* w2row = w_.data() + w2_index(head, 0);
  for (std::size_t j = 0; j < h; ++j) {
    const bool open = pre[j] > 0.0;
    deriv[j] = open ? w2row[j] : 0.0;
    hidden[j] = open ? pre[j] : 0.0;
  }

  if (x.is_sparse) {
    for (auto i : x.active) {
      const std::int64_t b = w1_index(0, i);
      std::copy(deriv.begin(), deriv.end(), g.values.begin() + b);
      g.spans.emplace_back(b, b + hidden_);
    }
  } else {
    for (int i = 0; i < in_; ++i) {
      const std::int64_t b = w1_index(0, i);
      const double xi = x.dense[i];
      for (std::size_t j = 0; j < h; ++j) g.values[b + j] = deriv[j] * xi;
    }
    if (in_ > 0) g.spans.emplace_back(0, b1_off_);
  }

  std::copy(deriv.begin(), deriv.end(), g.values.begin() + b1_off_);
  g.spans.emplace_back(b1_off_, b1_off_ + hidden_);

  const std::int64_t w2b = w2_index(head, 0);
  std::copy(hidden.begin(), hidden.end(), g.values.begin() + w2b);
  g.spans.emplace_back(w2b, w2b + hidden_);

  g.values[b2_index(head)] = 1.0;
  g.spans.emplace_back(b2_index(head), b2_index(head) + 1);

  return kernels::dot(w2row, hidden.data(), h) + w_[b2_index(head)];
}

void ReluNet::save(std::ostream& out) const {
  out << "tdlab-checkpoint v1\n";
  out << "relu_net " << in_ << " " << hidden_ << " " << out_ << "\n";
  out << "layout row-major-w1 b1 w2 b2 float64-le\n";
  std::vector<double> row(static_cast<std::size_t>(in_));
  for (int hnode = 0; hnode < hidden_; ++hnode) {
    for (int i = 0; i < in_; ++i) row[i] = w_[w1_index(hnode, i)];
    write_block(out, row.data(), row.size());
  }
  write_block(out, w_.data() + b1_off_, static_cast<std::size_t>(hidden_));
  write_block(out, w_.data() + w2_off_, static_cast<std::size_t>(out_) * hidden_);
  write_block(out, w_.data() + b2_off_, static_cast<std::size_t>(out_));
}

// ---------------------------------------------------------------- LinearModel

LinearModel::LinearModel(int features, int out) : features_(features), out_(out) {
  if (features < 1 || out < 1) throw std::invalid_argument("layer sizes must be positive");
  w_.assign(static_cast<std::size_t>(num_params()), 0.0);
}

double LinearModel::value(const FeatureVector& x, int head) const {
  if (x.length != features_) throw std::invalid_argument("input dimension mismatch");
  if (head < 0 || head >= out_) throw std::out_of_range("head out of range");
  const double* row = w_.data() + weight_index(head, 0);
  if (x.is_sparse) {
    double acc = 0.0;
    for (auto i : x.active) acc += row[i];
    return acc;
  }
  return kernels::dot(row, x.dense.data(), x.dense.size());
}

std::vector<double> LinearModel::values(const FeatureVector& x) const {
  std::vector<double> out(out_);
  for (int o = 0; o < out_; ++o) out[o] = value(x, o);
  return out;
}

double LinearModel::gradient(const FeatureVector& x, int head, GradBuffer& g) const {
  if (x.length != features_) throw std::invalid_argument("input dimension mismatch");
  if (head < 0 || head >= out_) throw std::out_of_range("head out of range");
  g.reset(num_params());
  const std::int64_t row = weight_index(head, 0);
  if (x.is_sparse) {
    for (auto i : x.active) {
      g.values[row + i] = 1.0;
      g.spans.emplace_back(row + i, row + i + 1);
    }
  } else {
    std::copy(x.dense.begin(), x.dense.end(), g.values.begin() + row);
    g.spans.emplace_back(row, row + features_);
  }
  return value(x, head);
}

void LinearModel::save(std::ostream& out) const {
  out << "tdlab-checkpoint v1\n";
  out << "linear " << features_ << " " << out_ << "\n";
  out << "layout row-major-w float64-le\n";
  write_block(out, w_.data(), w_.size());
}

// -------------------------------------------------------------------- loading

std::unique_ptr<Approximator> load_approximator(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != "tdlab-checkpoint v1") throw std::runtime_error("not a checkpoint");
  std::string shape_line;
  if (!std::getline(in, shape_line)) throw std::runtime_error("checkpoint truncated");
  std::istringstream shape(shape_line);
  std::string kind;
  shape >> kind;
  expect_key(in, "layout");

  if (kind == "relu_net") {
    int nin = 0, nhidden = 0, nout = 0;
    shape >> nin >> nhidden >> nout;
    if (!shape) throw std::runtime_error("checkpoint: bad relu_net shape");
    auto net = std::make_unique<ReluNet>(nin, nhidden, nout);
    auto& w = net->params();
    std::vector<double> row(static_cast<std::size_t>(nin));
    for (int h = 0; h < nhidden; ++h) {
      read_block(in, row.data(), row.size());
      for (int i = 0; i < nin; ++i) w[net->w1_index(h, i)] = row[i];
    }
    read_block(in, w.data() + net->b1_index(0), static_cast<std::size_t>(nhidden));
    read_block(in, w.data() + net->w2_index(0, 0), static_cast<std::size_t>(nout) * nhidden);
    read_block(in, w.data() + net->b2_index(0), static_cast<std::size_t>(nout));
    return net;
  }
  if (kind == "linear") {
    int nfeat = 0, nout = 0;
    shape >> nfeat >> nout;
    if (!shape) throw std::runtime_error("checkpoint: bad linear shape");
    auto model = std::make_unique<LinearModel>(nfeat, nout);
    read_block(in, model->params().data(), model->params().size());
    return model;
  }
  throw std::runtime_error("unknown approximator kind: " + kind);
}

}  // namespace tdlab
