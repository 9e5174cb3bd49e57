#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdlab/envs.hpp"

namespace tdlab {

// Network input: either a dense real vector or a sorted set of active
// indices into a binary vector of declared length.
struct FeatureVector {
  int length = 0;
  bool is_sparse = false;
  std::vector<double> dense;
  std::vector<std::int32_t> active;

  static FeatureVector make_dense(std::vector<double> values);
  static FeatureVector make_sparse(std::vector<std::int32_t> active_indices, int length);
  std::vector<double> to_dense() const;
};

// Affine map per dimension from [lo, hi] to [-1, 1]. Out-of-bounds
// components are clamped and counted, never rejected, so transforms stay
// total on trajectories that brush the boundary.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(std::vector<Bounds> bounds);
  StateVector apply(const StateVector& s) const;
  const std::vector<Bounds>& bounds() const { return bounds_; }
  std::uint64_t clamp_events() const { return clamp_events_.load(); }

 private:
  std::vector<Bounds> bounds_;
  mutable std::atomic<std::uint64_t> clamp_events_{0};
};

// Configured map from a raw environment state to the network input.
// Immutable after construction except for diagnostic counters and the
// grow-until-full index table of hashed tile coding.
class Transform {
 public:
  virtual ~Transform() = default;
  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual FeatureVector apply(const StateVector& s) const = 0;
  // Indices of coordinates appended by the map (the lift dimension of
  // lift-and-project, the function value of the epigraph embedding).
  // Used to force "upward" weight initialization.
  virtual std::vector<int> extra_coordinate_indices() const { return {}; }
  virtual std::uint64_t clamp_events() const { return 0; }
  virtual std::uint64_t hash_collisions() const { return 0; }
  // Portable text artifact capturing everything needed for exact
  // reproduction (config, RBF centers, hash table contents).
  virtual void save(std::ostream& out) const = 0;
};

std::unique_ptr<Transform> load_transform(std::istream& in);

// ------------------------------------------------------------- tile coding

struct TileCodingConfig {
  enum class Mode { joint, separate };
  enum class HashMode { table, pure };

  Mode mode = Mode::joint;
  int num_tilings = 1;
  std::vector<int> tiles_per_dim;
  // 0 disables hashing. With hashing, joint mode uses one table of this
  // size; separate mode uses one table of this size per input dimension.
  int memory_size = 0;
  HashMode hash_mode = HashMode::table;
  // Per-tiling displacement in tile widths. Empty selects the default
  // uniform diagonal displacement (tiling k shifted by k/num_tilings).
  std::vector<std::vector<double>> offsets;
  std::vector<Bounds> input_bounds;

  void validate() const;
  int code_length() const;
};

// First-come index assignment until the table is full, then a fixed 64-bit
// hash modulo the memory size. Collisions via the fallback path are
// counted. freeze() stops growth (for concurrent read-only use).
class IndexHashTable {
 public:
  explicit IndexHashTable(int memory_size) : memory_(memory_size) {}
  std::int32_t lookup(std::uint64_t key) const;
  std::uint64_t collisions() const { return collisions_.load(); }
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return map_.size(); }
  void save(std::ostream& out) const;
  void load_entries(std::istream& in, std::size_t count);

 private:
  int memory_;
  mutable std::unordered_map<std::uint64_t, std::int32_t> map_;
  mutable std::atomic<std::uint64_t> collisions_{0};
  bool frozen_ = false;
};

class TileCodingTransform final : public Transform {
 public:
  explicit TileCodingTransform(TileCodingConfig cfg);

  std::string kind() const override { return "tile_coding"; }
  int input_dim() const override { return static_cast<int>(cfg_.input_bounds.size()); }
  int output_dim() const override { return cfg_.code_length(); }
  FeatureVector apply(const StateVector& s) const override;
  std::uint64_t hash_collisions() const override;
  void save(std::ostream& out) const override;
  void freeze_tables();

  const TileCodingConfig& config() const { return cfg_; }

 private:
  friend std::unique_ptr<Transform> load_transform(std::istream&);
  TileCodingConfig cfg_;
  std::vector<std::vector<double>> offsets_;  // resolved
  std::vector<std::unique_ptr<IndexHashTable>> tables_;
  std::vector<int> segment_offset_;  // separate mode: start of each dim's block
  bool hashed_;
};

// ------------------------------------------------------- lift-and-project

struct LiftProjectConfig {
  enum class Mode { joint, separate };

  double radius = 1.0;
  double shift = 0.0;
  Mode mode = Mode::joint;
  // Separate mode: grouping of input dimensions into blocks embedded
  // independently. Empty selects one block per dimension. Must cover all
  // dimensions exactly once.
  std::vector<std::vector<int>> partition;
  std::vector<Bounds> input_bounds;

  void validate() const;
};

// Normalizes, lifts each block by a constant coordinate and projects it
// radially onto the sphere of the configured radius, then subtracts the
// shift from each appended coordinate.
class LiftProjectTransform final : public Transform {
 public:
  explicit LiftProjectTransform(LiftProjectConfig cfg);

  std::string kind() const override { return "lift_project"; }
  int input_dim() const override { return static_cast<int>(cfg_.input_bounds.size()); }
  int output_dim() const override;
  FeatureVector apply(const StateVector& s) const override;
  std::vector<int> extra_coordinate_indices() const override;
  std::uint64_t clamp_events() const override { return normalizer_.clamp_events(); }
  void save(std::ostream& out) const override;

  // Recovers the normalized input from a feature vector (divide each
  // block by its unshifted extra coordinate). Inverse of apply up to
  // normalization.
  StateVector invert(const std::vector<double>& features) const;

  const LiftProjectConfig& config() const { return cfg_; }

 private:
  LiftProjectConfig cfg_;
  Normalizer normalizer_;
  std::vector<std::vector<int>> blocks_;  // resolved partition
};

// ------------------------------------------------------------- epigraph

// Appends g(x) to the normalized input, embedding it into the graph of the
// strictly convex g (default squared Euclidean norm).
class EpigraphTransform final : public Transform {
 public:
  explicit EpigraphTransform(std::vector<Bounds> input_bounds);

  std::string kind() const override { return "epigraph"; }
  int input_dim() const override { return static_cast<int>(normalizer_.bounds().size()); }
  int output_dim() const override { return input_dim() + 1; }
  FeatureVector apply(const StateVector& s) const override;
  std::vector<int> extra_coordinate_indices() const override { return {input_dim()}; }
  std::uint64_t clamp_events() const override { return normalizer_.clamp_events(); }
  void save(std::ostream& out) const override;

 private:
  Normalizer normalizer_;
};

// Free-standing embedding used by the epigraph transform and its tests:
// x concatenated with g(x).
std::vector<double> epigraph_embed(const std::vector<double>& x, double (*g)(const std::vector<double>&));
double squared_norm(const std::vector<double>& x);

// ------------------------------------------------------------------- RBF

struct RbfConfig {
  int num_centers = 0;
  double width = 0.1;               // sigma, in normalized units
  double sparsify_threshold = 0.0;  // 0 disables sparsification
  std::uint64_t centers_seed = 0;
  // Centers in normalized space. Empty: drawn uniformly from centers_seed
  // at construction.
  std::vector<StateVector> centers;
  std::vector<Bounds> input_bounds;

  void validate() const;
};

class RbfTransform final : public Transform {
 public:
  explicit RbfTransform(RbfConfig cfg);

  std::string kind() const override { return "rbf"; }
  int input_dim() const override { return static_cast<int>(cfg_.input_bounds.size()); }
  int output_dim() const override { return cfg_.num_centers; }
  FeatureVector apply(const StateVector& s) const override;
  std::uint64_t clamp_events() const override { return normalizer_.clamp_events(); }
  void save(std::ostream& out) const override;

  const std::vector<StateVector>& centers() const { return cfg_.centers; }
  const RbfConfig& config() const { return cfg_; }

 private:
  RbfConfig cfg_;
  Normalizer normalizer_;
};

// ------------------------------------------------------------- identity

// Normalization only; the raw-input baseline.
class IdentityTransform final : public Transform {
 public:
  explicit IdentityTransform(std::vector<Bounds> input_bounds);

  std::string kind() const override { return "identity"; }
  int input_dim() const override { return static_cast<int>(normalizer_.bounds().size()); }
  int output_dim() const override { return input_dim(); }
  FeatureVector apply(const StateVector& s) const override;
  std::uint64_t clamp_events() const override { return normalizer_.clamp_events(); }
  void save(std::ostream& out) const override;

 private:
  Normalizer normalizer_;
};

}  // namespace tdlab
