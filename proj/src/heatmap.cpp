#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tdlab/harness.hpp"

namespace tdlab {

namespace {

std::vector<double> cell_centers(const Bounds& b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (b.hi - b.lo) / n;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = b.lo + (i + 0.5) * step;
  return out;
}

std::vector<int> parse_node_list(const std::string& spec, int hidden) {
  std::vector<int> nodes;
  if (spec == "all") {
    nodes.resize(static_cast<std::size_t>(hidden));
    for (int i = 0; i < hidden; ++i) nodes[static_cast<std::size_t>(i)] = i;
    return nodes;
  }
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    const int node = std::stoi(tok);
    if (node < 0 || node >= hidden) {
      throw std::runtime_error("node index " + tok + " out of range for " + std::to_string(hidden) +
                               " hidden nodes");
    }
    nodes.push_back(node);
  }
  if (nodes.empty()) throw std::runtime_error("empty node list: " + spec);
  return nodes;
}

}  // namespace

std::vector<double> node_response_grid(const ReluNet& net, const Transform& transform,
                                       const std::vector<Bounds>& bounds, int node, int n) {
  if (bounds.size() != 2) throw std::runtime_error("response grids are defined for 2-D state spaces");
  if (node < 0 || node >= net.hidden_dim()) throw std::runtime_error("node index out of range");
  const auto xs = cell_centers(bounds[0], n);
  const auto ys = cell_centers(bounds[1], n);
  std::vector<double> matrix(static_cast<std::size_t>(n) * n);
  std::vector<double> state(2);
  for (int r = 0; r < n; ++r) {
    state[1] = ys[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      state[0] = xs[static_cast<std::size_t>(c)];
      matrix[static_cast<std::size_t>(r) * n + c] = net.node_response(node, transform.apply(state));
    }
  }
  return matrix;
}

int count_components(const std::vector<double>& matrix, int rows, int cols) {
  if (matrix.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::runtime_error("matrix size does not match rows*cols");
  }
  std::vector<char> seen(matrix.size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t at = static_cast<std::size_t>(r) * cols + c;
      if (seen[at] || !(matrix[at] > 0.0)) continue;
      ++components;
      seen[at] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const auto [cr, cc] = stack.back();
        stack.pop_back();
        const int dr[] = {-1, 1, 0, 0};
        const int dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = cr + dr[k], nc = cc + dc[k];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
          const std::size_t nat = static_cast<std::size_t>(nr) * cols + nc;
          if (seen[nat] || !(matrix[nat] > 0.0)) continue;
          seen[nat] = 1;
          stack.push_back({nr, nc});
        }
      }
    }
  }
  return components;
}

void write_pgm(std::ostream& out, const std::vector<double>& matrix, int rows, int cols) {
  if (matrix.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::runtime_error("matrix size does not match rows*cols");
  }
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  for (double v : matrix) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  out << "P5\n" << cols << " " << rows << "\n255\n";
  std::vector<unsigned char> bytes(matrix.size(), 0);
  if (mx > mn) {
    const double scale = 255.0 / (mx - mn);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      bytes[i] = static_cast<unsigned char>(std::lround((matrix[i] - mn) * scale));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void run_heatmap_command(const HeatmapRequest& req, std::ostream& log) {
  if (req.grid < 2) throw std::runtime_error("grid must be at least 2");
  const ConfigFile raw = ConfigFile::parse_file(resolve_config_path(req.config_path));
  auto env = build_environment(raw);
  if (env->state_dim() != 2) {
    throw std::runtime_error("heatmaps are defined for 2-D state spaces, got " +
                             std::to_string(env->state_dim()) + "-D");
  }

  std::unique_ptr<Transform> transform;
  if (!req.transform_path.empty()) {
    std::ifstream in(req.transform_path);
    if (!in) throw std::runtime_error("cannot open transform: " + req.transform_path);
    transform = load_transform(in);
  } else {
    transform = build_transform(raw, *env);
  }

  std::ifstream ckpt(req.checkpoint_path, std::ios::binary);
  if (!ckpt) throw std::runtime_error("cannot open checkpoint: " + req.checkpoint_path);
  auto approx = load_approximator(ckpt);
  auto* net = dynamic_cast<ReluNet*>(approx.get());
  if (net == nullptr) throw std::runtime_error("heatmaps need a relu_net checkpoint");
  if (net->input_dim() != transform->output_dim()) {
    throw std::runtime_error("checkpoint expects " + std::to_string(net->input_dim()) +
                             " inputs but transform emits " + std::to_string(transform->output_dim()));
  }

  const std::vector<int> nodes = parse_node_list(req.nodes, net->hidden_dim());
  const int n = req.grid;
  const auto& bounds = env->state_bounds();
  const auto xs = cell_centers(bounds[0], n);
  const auto ys = cell_centers(bounds[1], n);

  std::vector<std::vector<double>> matrices(nodes.size(),
                                            std::vector<double>(static_cast<std::size_t>(n) * n));
  std::vector<double> state(2);
  for (int r = 0; r < n; ++r) {
    state[1] = ys[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      state[0] = xs[static_cast<std::size_t>(c)];
      const std::vector<double> hidden = net->hidden_activations(transform->apply(state));
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        matrices[k][static_cast<std::size_t>(r) * n + c] = hidden[static_cast<std::size_t>(nodes[k])];
      }
    }
  }

  std::filesystem::create_directories(req.out_dir);
  std::ofstream comp(req.out_dir + "/components.csv");
  if (!comp) throw std::runtime_error("cannot write " + req.out_dir + "/components.csv");
  comp << "# config " << raw.hash_hex() << " grid " << n << "\n";
  comp << "node,components\n";

  int comp_min = std::numeric_limits<int>::max(), comp_max = 0;
  long comp_sum = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int node = nodes[k];
    const auto& m = matrices[k];

    std::ostringstream base;
    base << req.out_dir << "/node_" << node;
    std::ofstream csv(base.str() + ".csv");
    if (!csv) throw std::runtime_error("cannot write " + base.str() + ".csv");
    csv << "# config " << raw.hash_hex() << " node " << node << "\n";
    csv << std::setprecision(12);
    for (int c = 0; c < n; ++c) csv << (c ? "," : "") << "c" << c;
    csv << "\n";
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) csv << (c ? "," : "") << m[static_cast<std::size_t>(r) * n + c];
      csv << "\n";
    }

    std::ofstream pgm(base.str() + ".pgm", std::ios::binary);
    if (!pgm) throw std::runtime_error("cannot write " + base.str() + ".pgm");
    write_pgm(pgm, m, n, n);

    const int components = count_components(m, n, n);
    comp << node << "," << components << "\n";
    comp_min = std::min(comp_min, components);
    comp_max = std::max(comp_max, components);
    comp_sum += components;
  }

  log << "wrote " << nodes.size() << " node maps on a " << n << "x" << n << " grid to " << req.out_dir
      << "\n";
  log << "active-region components: min " << comp_min << ", mean "
      << std::setprecision(4) << static_cast<double>(comp_sum) / static_cast<double>(nodes.size())
      << ", max " << comp_max << "\n";
}

}  // namespace tdlab
