#include "tdlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tdlab/kernels.hpp"
#include "tdlab/rng.hpp"

namespace tdlab {

namespace {

double clampd(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
}

std::string expect_line_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("transform artifact truncated at " + key);
  if (line.rfind(key, 0) != 0) throw std::runtime_error("transform artifact: expected '" + key + "', got '" + line + "'");
  std::string rest = line.substr(key.size());
  if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
  return rest;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

std::vector<Bounds> parse_bounds(const std::string& s) {
  auto vals = parse_doubles(s);
  if (vals.size() % 2 != 0) throw std::runtime_error("bounds line must hold lo/hi pairs");
  std::vector<Bounds> b;
  for (std::size_t i = 0; i < vals.size(); i += 2) b.push_back({vals[i], vals[i + 1]});
  return b;
}

void write_bounds(std::ostream& out, const std::vector<Bounds>& b) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i].lo << " " << b[i].hi;
}

}  // namespace

// -------------------------------------------------------------- FeatureVector

FeatureVector FeatureVector::make_dense(std::vector<double> values) {
  FeatureVector f;
  f.length = static_cast<int>(values.size());
  f.is_sparse = false;
  f.dense = std::move(values);
  return f;
}

FeatureVector FeatureVector::make_sparse(std::vector<std::int32_t> active_indices, int length) {
  FeatureVector f;
  f.length = length;
  f.is_sparse = true;
  f.active = std::move(active_indices);
  for (std::size_t i = 0; i < f.active.size(); ++i) {
    if (f.active[i] < 0 || f.active[i] >= length) throw std::invalid_argument("active index out of range");
    if (i > 0 && f.active[i] <= f.active[i - 1]) throw std::invalid_argument("active indices must be strictly increasing");
  }
  return f;
}

std::vector<double> FeatureVector::to_dense() const {
  if (!is_sparse) return dense;
  std::vector<double> out(length, 0.0);
  for (auto i : active) out[i] = 1.0;
  return out;
}

// ----------------------------------------------------------------- Normalizer

Normalizer::Normalizer(std::vector<Bounds> bounds) : bounds_(std::move(bounds)) {
  for (const auto& b : bounds_) {
    if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw std::invalid_argument("normalizer bounds must be finite with lo < hi");
    }
  }
}

StateVector Normalizer::apply(const StateVector& s) const {
  if (s.size() != bounds_.size()) throw std::invalid_argument("state dimension mismatch");
  StateVector out(s.size());
  bool clamped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double v = s[i];
    if (v < bounds_[i].lo || v > bounds_[i].hi) {
      v = clampd(v, bounds_[i].lo, bounds_[i].hi);
      clamped = true;
    }
    out[i] = -1.0 + 2.0 * (v - bounds_[i].lo) / (bounds_[i].hi - bounds_[i].lo);
  }
  if (clamped) clamp_events_.fetch_add(1, std::memory_order_relaxed);
  return out;
}

// ---------------------------------------------------------------- tile coding

void TileCodingConfig::validate() const {
  if (num_tilings < 1) throw std::invalid_argument("num_tilings must be positive");
  if (tiles_per_dim.empty()) throw std::invalid_argument("tiles_per_dim must not be empty");
  if (tiles_per_dim.size() != input_bounds.size()) {
    throw std::invalid_argument("tiles_per_dim and input_bounds must agree");
  }
  for (int t : tiles_per_dim) {
    if (t < 1) throw std::invalid_argument("tiles_per_dim entries must be positive");
  }
  for (const auto& b : input_bounds) {
    if (!(b.lo < b.hi)) throw std::invalid_argument("input bounds must satisfy lo < hi");
  }
  if (memory_size < 0) throw std::invalid_argument("memory_size must be nonnegative");
  if (!offsets.empty()) {
    if (static_cast<int>(offsets.size()) != num_tilings) throw std::invalid_argument("offsets must have one row per tiling");
    for (const auto& row : offsets) {
      if (row.size() != tiles_per_dim.size()) throw std::invalid_argument("offset row length must match dimensions");
    }
  }
}

int TileCodingConfig::code_length() const {
  const int dims = static_cast<int>(tiles_per_dim.size());
  if (mode == Mode::joint) {
    if (memory_size > 0) return memory_size;
    long long cells = 1;
    for (int t : tiles_per_dim) cells *= t;
    return static_cast<int>(num_tilings * cells);
  }
  if (memory_size > 0) return dims * memory_size;
  int total = 0;
  for (int t : tiles_per_dim) total += num_tilings * t;
  return total;
}

std::int32_t IndexHashTable::lookup(std::uint64_t key) const {
  auto it = map_.find(key);
  if (it != map_.end()) return it->second;
  if (!frozen_ && map_.size() < static_cast<std::size_t>(memory_)) {
    const auto idx = static_cast<std::int32_t>(map_.size());
    map_.emplace(key, idx);
    return idx;
  }
  collisions_.fetch_add(1, std::memory_order_relaxed);
  return static_cast<std::int32_t>(hash64(key) % static_cast<std::uint64_t>(memory_));
}

void IndexHashTable::save(std::ostream& out) const {
  std::vector<std::pair<std::int32_t, std::uint64_t>> entries;
  entries.reserve(map_.size());
  for (const auto& [key, idx] : map_) entries.emplace_back(idx, key);
  std::sort(entries.begin(), entries.end());
  out << "table " << memory_ << " " << entries.size() << " " << (frozen_ ? 1 : 0) << "\n";
  for (const auto& [idx, key] : entries) out << key << " " << idx << "\n";
}

void IndexHashTable::load_entries(std::istream& in, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t key;
    std::int32_t idx;
    if (!(in >> key >> idx)) throw std::runtime_error("transform artifact: bad table entry");
    map_.emplace(key, idx);
  }
  std::string rest;
  std::getline(in, rest);
}

TileCodingTransform::TileCodingTransform(TileCodingConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  hashed_ = cfg_.memory_size > 0;
  const int dims = static_cast<int>(cfg_.tiles_per_dim.size());
  if (cfg_.offsets.empty()) {
    offsets_.assign(cfg_.num_tilings, std::vector<double>(dims, 0.0));
    for (int k = 0; k < cfg_.num_tilings; ++k) {
      for (int d = 0; d < dims; ++d) {
        offsets_[k][d] = static_cast<double>(k) / cfg_.num_tilings;
      }
    }
  } else {
    offsets_ = cfg_.offsets;
  }
  if (hashed_) {
    const int num_tables = cfg_.mode == TileCodingConfig::Mode::joint ? 1 : dims;
    for (int i = 0; i < num_tables; ++i) {
      tables_.push_back(std::make_unique<IndexHashTable>(cfg_.memory_size));
    }
  }
  segment_offset_.assign(dims, 0);
  if (cfg_.mode == TileCodingConfig::Mode::separate) {
    int off = 0;
    for (int d = 0; d < dims; ++d) {
      segment_offset_[d] = off;
      off += hashed_ ? cfg_.memory_size : cfg_.num_tilings * cfg_.tiles_per_dim[d];
    }
  }
}

FeatureVector TileCodingTransform::apply(const StateVector& s) const {
  const int dims = input_dim();
  if (static_cast<int>(s.size()) != dims) throw std::invalid_argument("state dimension mismatch");
  const int n = cfg_.num_tilings;
  std::vector<std::int32_t> active;

  // unit coordinate per dimension, clamped to the declared bounds
  std::vector<double> unit(dims);
  for (int d = 0; d < dims; ++d) {
    const auto& b = cfg_.input_bounds[d];
    unit[d] = clampd((s[d] - b.lo) / (b.hi - b.lo), 0.0, 1.0);
  }

  if (cfg_.mode == TileCodingConfig::Mode::joint) {
    active.reserve(n);
    long long cells = 1;
    for (int t : cfg_.tiles_per_dim) cells *= t;
    for (int k = 0; k < n; ++k) {
      // mixed-radix cell key, exact as long as num_tilings * prod(tiles) fits 64 bits
      std::uint64_t key = static_cast<std::uint64_t>(k);
      long long cell = 0;
      for (int d = 0; d < dims; ++d) {
        const int t = cfg_.tiles_per_dim[d];
        int c = static_cast<int>(std::floor(unit[d] * t + offsets_[k][d]));
        c = std::min(std::max(c, 0), t - 1);
        key = key * static_cast<std::uint64_t>(t) + static_cast<std::uint64_t>(c);
        cell = cell * t + c;
      }
      if (hashed_) {
        active.push_back(tables_[0]->lookup(key));
      } else {
        active.push_back(static_cast<std::int32_t>(k * cells + cell));
      }
    }
  } else {
    active.reserve(static_cast<std::size_t>(dims) * n);
    for (int d = 0; d < dims; ++d) {
      const int t = cfg_.tiles_per_dim[d];
      for (int k = 0; k < n; ++k) {
        int c = static_cast<int>(std::floor(unit[d] * t + offsets_[k][d]));
        c = std::min(std::max(c, 0), t - 1);
        std::int32_t local;
        if (hashed_) {
          const std::uint64_t key = static_cast<std::uint64_t>(k) * t + static_cast<std::uint64_t>(c);
          local = tables_[d]->lookup(key);
        } else {
          local = static_cast<std::int32_t>(k * t + c);
        }
        active.push_back(segment_offset_[d] + local);
      }
    }
  }
  std::sort(active.begin(), active.end());
  // hash collisions can merge active bits; duplicates are dropped
  active.erase(std::unique(active.begin(), active.end()), active.end());
  return FeatureVector::make_sparse(std::move(active), output_dim());
}

std::uint64_t TileCodingTransform::hash_collisions() const {
  std::uint64_t total = 0;
  for (const auto& t : tables_) total += t->collisions();
  return total;
}

void TileCodingTransform::freeze_tables() {
  for (auto& t : tables_) t->freeze();
}

void TileCodingTransform::save(std::ostream& out) const {
  out << "tdlab-transform v1\nkind tile_coding\n";
  out << "mode " << (cfg_.mode == TileCodingConfig::Mode::joint ? "joint" : "separate") << "\n";
  out << "num_tilings " << cfg_.num_tilings << "\n";
  out << "tiles_per_dim";
  for (int t : cfg_.tiles_per_dim) out << " " << t;
  out << "\nmemory_size " << cfg_.memory_size << "\n";
  out << "hash_mode " << (cfg_.hash_mode == TileCodingConfig::HashMode::table ? "table" : "pure") << "\n";
  out << "bounds ";
  write_bounds(out, cfg_.input_bounds);
  out << "\noffsets " << offsets_.size() << "\n";
  for (const auto& row : offsets_) {
    write_doubles(out, row);
    out << "\n";
  }
  out << "tables " << tables_.size() << "\n";
  for (const auto& t : tables_) t->save(out);
  out << "end\n";
}

// ----------------------------------------------------------- lift-and-project

void LiftProjectConfig::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (input_bounds.empty()) throw std::invalid_argument("input bounds required");
  if (mode == Mode::separate && !partition.empty()) {
    std::vector<int> seen(input_bounds.size(), 0);
    for (const auto& block : partition) {
      if (block.empty()) throw std::invalid_argument("empty partition block");
      for (int d : block) {
        if (d < 0 || d >= static_cast<int>(input_bounds.size())) throw std::invalid_argument("partition index out of range");
        if (seen[d]++) throw std::invalid_argument("partition must cover each dimension exactly once");
      }
    }
    for (int c : seen) {
      if (c != 1) throw std::invalid_argument("partition must cover each dimension exactly once");
    }
  }
}

LiftProjectTransform::LiftProjectTransform(LiftProjectConfig cfg)
    : cfg_(std::move(cfg)), normalizer_(cfg_.input_bounds) {
  cfg_.validate();
  const int dims = input_dim();
  if (cfg_.mode == LiftProjectConfig::Mode::joint) {
    blocks_.emplace_back();
    for (int d = 0; d < dims; ++d) blocks_[0].push_back(d);
  } else if (cfg_.partition.empty()) {
    for (int d = 0; d < dims; ++d) blocks_.push_back({d});
  } else {
    blocks_ = cfg_.partition;
  }
}

int LiftProjectTransform::output_dim() const {
  return input_dim() + static_cast<int>(blocks_.size());
}

FeatureVector LiftProjectTransform::apply(const StateVector& s) const {
  const StateVector x = normalizer_.apply(s);
  std::vector<double> out;
  out.reserve(output_dim());
  for (const auto& block : blocks_) {
    double norm_sq = 1.0;
    for (int d : block) norm_sq += x[d] * x[d];
    const double scale = cfg_.radius / std::sqrt(norm_sq);
    for (int d : block) out.push_back(scale * x[d]);
    out.push_back(scale - cfg_.shift);
  }
  return FeatureVector::make_dense(std::move(out));
}

std::vector<int> LiftProjectTransform::extra_coordinate_indices() const {
  std::vector<int> extras;
  int pos = 0;
  for (const auto& block : blocks_) {
    pos += static_cast<int>(block.size());
    extras.push_back(pos);
    ++pos;
  }
  return extras;
}

StateVector LiftProjectTransform::invert(const std::vector<double>& features) const {
  if (static_cast<int>(features.size()) != output_dim()) throw std::invalid_argument("feature length mismatch");
  StateVector x(input_dim(), 0.0);
  int pos = 0;
  for (const auto& block : blocks_) {
    const double extra = features[pos + block.size()] + cfg_.shift;
    if (extra == 0.0) throw std::domain_error("degenerate feature block");
    for (std::size_t i = 0; i < block.size(); ++i) x[block[i]] = features[pos + i] / extra;
    pos += static_cast<int>(block.size()) + 1;
  }
  return x;
}

void LiftProjectTransform::save(std::ostream& out) const {
  out << "tdlab-transform v1\nkind lift_project\n";
  out << std::setprecision(17) << "radius " << cfg_.radius << "\nshift " << cfg_.shift << "\n";
  out << "mode " << (cfg_.mode == LiftProjectConfig::Mode::joint ? "joint" : "separate") << "\n";
  out << "bounds ";
  write_bounds(out, cfg_.input_bounds);
  out << "\nblocks " << blocks_.size() << "\n";
  for (const auto& block : blocks_) {
    for (std::size_t i = 0; i < block.size(); ++i) out << (i ? " " : "") << block[i];
    out << "\n";
  }
  out << "end\n";
}

// ---------------------------------------------------------------- epigraph

double squared_norm(const std::vector<double>& x) {
  return kernels::sum_sq(x.data(), x.size());
}

std::vector<double> epigraph_embed(const std::vector<double>& x, double (*g)(const std::vector<double>&)) {
  std::vector<double> out = x;
  out.push_back(g(x));
  return out;
}

EpigraphTransform::EpigraphTransform(std::vector<Bounds> input_bounds)
    : normalizer_(std::move(input_bounds)) {}

FeatureVector EpigraphTransform::apply(const StateVector& s) const {
  return FeatureVector::make_dense(epigraph_embed(normalizer_.apply(s), &squared_norm));
}

void EpigraphTransform::save(std::ostream& out) const {
  out << "tdlab-transform v1\nkind epigraph\nbounds ";
  write_bounds(out, normalizer_.bounds());
  out << "\nend\n";
}

// --------------------------------------------------------------------- RBF

void RbfConfig::validate() const {
  if (num_centers < 1) throw std::invalid_argument("num_centers must be positive");
  if (!(width > 0.0)) throw std::invalid_argument("width must be positive");
  if (sparsify_threshold < 0.0) throw std::invalid_argument("sparsify_threshold must be nonnegative");
  if (input_bounds.empty()) throw std::invalid_argument("input bounds required");
  for (const auto& c : centers) {
    if (c.size() != input_bounds.size()) throw std::invalid_argument("center dimension mismatch");
    for (double v : c) {
      if (v < -1.0 || v > 1.0) throw std::invalid_argument("centers must lie in normalized space");
    }
  }
}

RbfTransform::RbfTransform(RbfConfig cfg) : cfg_(std::move(cfg)), normalizer_(cfg_.input_bounds) {
  cfg_.validate();
  if (cfg_.centers.empty()) {
    Rng rng(cfg_.centers_seed);
    cfg_.centers.resize(cfg_.num_centers);
    for (auto& c : cfg_.centers) {
      c.resize(cfg_.input_bounds.size());
      for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    }
  } else if (static_cast<int>(cfg_.centers.size()) != cfg_.num_centers) {
    throw std::invalid_argument("explicit centers must match num_centers");
  }
}

FeatureVector RbfTransform::apply(const StateVector& s) const {
  const StateVector x = normalizer_.apply(s);
  std::vector<double> out(cfg_.num_centers);
  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg_.width * cfg_.width);
  for (int i = 0; i < cfg_.num_centers; ++i) {
    const double d2 = kernels::sq_dist(x.data(), cfg_.centers[i].data(), x.size());
    double v = std::exp(-d2 * inv_two_sigma_sq);
    if (cfg_.sparsify_threshold > 0.0 && v < cfg_.sparsify_threshold) v = 0.0;
    out[i] = v;
  }
  return FeatureVector::make_dense(std::move(out));
}

void RbfTransform::save(std::ostream& out) const {
  out << "tdlab-transform v1\nkind rbf\n";
  out << std::setprecision(17) << "num_centers " << cfg_.num_centers << "\nwidth " << cfg_.width
      << "\nsparsify_threshold " << cfg_.sparsify_threshold << "\ncenters_seed " << cfg_.centers_seed << "\n";
  out << "bounds ";
  write_bounds(out, cfg_.input_bounds);
  out << "\ncenters " << cfg_.centers.size() << "\n";
  for (const auto& c : cfg_.centers) {
    write_doubles(out, c);
    out << "\n";
  }
  out << "end\n";
}

// ---------------------------------------------------------------- identity

IdentityTransform::IdentityTransform(std::vector<Bounds> input_bounds)
    : normalizer_(std::move(input_bounds)) {}

FeatureVector IdentityTransform::apply(const StateVector& s) const {
  return FeatureVector::make_dense(normalizer_.apply(s));
}

void IdentityTransform::save(std::ostream& out) const {
  out << "tdlab-transform v1\nkind identity\nbounds ";
  write_bounds(out, normalizer_.bounds());
  out << "\nend\n";
}

// ------------------------------------------------------------------ loading

std::unique_ptr<Transform> load_transform(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != "tdlab-transform v1") throw std::runtime_error("not a transform artifact");
  const std::string kind = expect_line_key(in, "kind");

  if (kind == "identity") {
    auto bounds = parse_bounds(expect_line_key(in, "bounds"));
    expect_line_key(in, "end");
    return std::make_unique<IdentityTransform>(std::move(bounds));
  }
  if (kind == "epigraph") {
    auto bounds = parse_bounds(expect_line_key(in, "bounds"));
    expect_line_key(in, "end");
    return std::make_unique<EpigraphTransform>(std::move(bounds));
  }
  if (kind == "lift_project") {
    LiftProjectConfig cfg;
    cfg.radius = std::stod(expect_line_key(in, "radius"));
    cfg.shift = std::stod(expect_line_key(in, "shift"));
    cfg.mode = expect_line_key(in, "mode") == "joint" ? LiftProjectConfig::Mode::joint
                                                      : LiftProjectConfig::Mode::separate;
    cfg.input_bounds = parse_bounds(expect_line_key(in, "bounds"));
    const int nblocks = std::stoi(expect_line_key(in, "blocks"));
    std::vector<std::vector<int>> blocks;
    for (int i = 0; i < nblocks; ++i) {
      std::string line;
      std::getline(in, line);
      std::istringstream is(line);
      std::vector<int> block;
      int d;
      while (is >> d) block.push_back(d);
      blocks.push_back(std::move(block));
    }
    if (cfg.mode == LiftProjectConfig::Mode::separate) cfg.partition = blocks;
    expect_line_key(in, "end");
    return std::make_unique<LiftProjectTransform>(std::move(cfg));
  }
  if (kind == "rbf") {
    RbfConfig cfg;
    cfg.num_centers = std::stoi(expect_line_key(in, "num_centers"));
    cfg.width = std::stod(expect_line_key(in, "width"));
    cfg.sparsify_threshold = std::stod(expect_line_key(in, "sparsify_threshold"));
    cfg.centers_seed = std::stoull(expect_line_key(in, "centers_seed"));
    cfg.input_bounds = parse_bounds(expect_line_key(in, "bounds"));
    const int ncenters = std::stoi(expect_line_key(in, "centers"));
    for (int i = 0; i < ncenters; ++i) {
      std::string line;
      std::getline(in, line);
      cfg.centers.push_back(parse_doubles(line));
    }
    expect_line_key(in, "end");
    return std::make_unique<RbfTransform>(std::move(cfg));
  }
  if (kind == "tile_coding") {
    TileCodingConfig cfg;
    cfg.mode = expect_line_key(in, "mode") == "joint" ? TileCodingConfig::Mode::joint
                                                      : TileCodingConfig::Mode::separate;
    cfg.num_tilings = std::stoi(expect_line_key(in, "num_tilings"));
    {
      std::istringstream is(expect_line_key(in, "tiles_per_dim"));
      int t;
      while (is >> t) cfg.tiles_per_dim.push_back(t);
    }
    cfg.memory_size = std::stoi(expect_line_key(in, "memory_size"));
    cfg.hash_mode = expect_line_key(in, "hash_mode") == "table" ? TileCodingConfig::HashMode::table
                                                                : TileCodingConfig::HashMode::pure;
    cfg.input_bounds = parse_bounds(expect_line_key(in, "bounds"));
    const int noffsets = std::stoi(expect_line_key(in, "offsets"));
    for (int i = 0; i < noffsets; ++i) {
      std::string line;
      std::getline(in, line);
      cfg.offsets.push_back(parse_doubles(line));
    }
    auto transform = std::make_unique<TileCodingTransform>(std::move(cfg));
    const int ntables = std::stoi(expect_line_key(in, "tables"));
    if (ntables != static_cast<int>(transform->tables_.size())) {
      throw std::runtime_error("transform artifact: table count mismatch");
    }
    for (int i = 0; i < ntables; ++i) {
      std::istringstream is(expect_line_key(in, "table"));
      int memory = 0, frozen = 0;
      std::size_t count = 0;
      is >> memory >> count >> frozen;
      transform->tables_[i]->load_entries(in, count);
      if (frozen) transform->tables_[i]->freeze();
    }
    expect_line_key(in, "end");
    return transform;
  }
  throw std::runtime_error("unknown transform kind: " + kind);
}

}  // namespace tdlab
