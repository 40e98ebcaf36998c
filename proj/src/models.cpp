#include "tgfuse/models.hpp"

#include <cmath>
#include <stdexcept>

#include "tgfuse/errors.hpp"

namespace tgfuse::models {

using nn::NodeId;
using nn::Tape;

Kind kind_from_string(const std::string& s) {
  if (s == "hawkes-gcn") return Kind::HawkesGcn;
  if (s == "hawkes-gat") return Kind::HawkesGat;
  if (s == "gcn") return Kind::Gcn;
  if (s == "gat") return Kind::Gat;
  throw UsageError("unknown model '" + s + "' (expected hawkes-gcn, hawkes-gat, gcn or gat)");
}

std::string kind_to_string(Kind k) {
  switch (k) {
    case Kind::HawkesGcn: return "hawkes-gcn";
    case Kind::HawkesGat: return "hawkes-gat";
    case Kind::Gcn: return "gcn";
    case Kind::Gat: return "gat";
  }
  return "?";
}

std::vector<double> inverse_sqrt_norm(const PairIndex& adj, const DegreeVector& deg) {
  if (deg.size() != adj.num_nodes)
    throw std::invalid_argument("inverse_sqrt_norm: degree vector size mismatch");
  std::vector<double> inv(static_cast<std::size_t>(adj.num_pairs()));
  for (std::int64_t p = 0; p < adj.num_pairs(); ++p) {
    const double di = deg[adj.pair_src[p]] > 0 ? deg[adj.pair_src[p]] : 1.0;
    const double dj = deg[adj.pair_dst[p]] > 0 ? deg[adj.pair_dst[p]] : 1.0;
    inv[p] = 1.0 / std::sqrt(di * dj);
  }
  return inv;
}

namespace {

Mat glorot(int rows, int cols, Rng& init) {
  Mat m(rows, cols);
  nn::glorot_uniform(m, init);
  return m;
}

std::vector<std::int64_t> to_index_vector(std::span<const std::int64_t> v) {
  return {v.begin(), v.end()};
}

// Segment boundaries over pairs, skipping sources without neighbors (the
// softmax has nothing to normalize there; such nodes keep only the root term).
std::vector<std::int64_t> nonempty_segments(const PairIndex& adj) {
  std::vector<std::int64_t> offs{0};
  for (std::int32_t i = 0; i < adj.num_nodes; ++i) {
    if (adj.row_ptr[i + 1] > adj.row_ptr[i]) offs.push_back(adj.row_ptr[i + 1]);
  }
  return offs;
}

}  // namespace

HawkesGcnLayer::HawkesGcnLayer(std::int32_t num_nodes, int d_in, int d_out, bool bn,
                               const std::string& prefix, Rng& init)
    : weight(prefix + ".w", glorot(d_in, d_out, init)),
      weight_root(prefix + ".w_root", glorot(d_in, d_out, init)),
      delta_raw(prefix + ".delta", Mat::zeros(num_nodes, 1)),
      use_bn(bn) {}

NodeId HawkesGcnLayer::forward(Tape& t, NodeId h, const TemporalGraph& g,
                               const DegreeVector& deg,
                               std::span<const std::int64_t> local_to_global,
                               bool training) {
  const PairIndex& adj = g.pairs();
  NodeId raw = t.param(delta_raw);
  if (!local_to_global.empty()) raw = t.gather_rows(raw, to_index_vector(local_to_global));
  NodeId delta = t.softplus(raw);
  NodeId coeff = t.node_decay(delta, adj, g.window_end(), inverse_sqrt_norm(adj, deg));
  NodeId hw = t.matmul(h, t.param(weight));
  NodeId out = t.add(t.coeff_spmm(coeff, hw, adj),
                     t.matmul(h, t.param(weight_root)));
  if (use_bn) out = t.row_normalize_bn(out, training);
  return out;
}

std::vector<nn::Parameter*> HawkesGcnLayer::params() {
  return {&weight, &weight_root, &delta_raw};
}

HawkesGatLayer::HawkesGatLayer(int d_in, int d_out, const std::string& prefix, Rng& init)
    : weight(prefix + ".w", glorot(d_in, d_out, init)),
      weight_root(prefix + ".w_root", glorot(d_in, d_out, init)),
      att(prefix + ".att", glorot(2 * d_out, 1, init)) {}

NodeId HawkesGatLayer::forward(Tape& t, NodeId h, const TemporalGraph& g,
                               const DegreeVector& deg, bool /*training*/,
                               NodeId* attention_out) {
  const PairIndex& adj = g.pairs();
  NodeId root = t.matmul(h, t.param(weight_root));
  if (adj.num_pairs() == 0) return root;

  NodeId hw = t.matmul(h, t.param(weight));
  std::vector<std::int64_t> src_idx(adj.pair_src.begin(), adj.pair_src.end());
  std::vector<std::int64_t> dst_idx(adj.pair_dst.begin(), adj.pair_dst.end());
  NodeId cat = t.concat_cols(t.gather_rows(hw, std::move(src_idx)),
                             t.gather_rows(hw, std::move(dst_idx)));
  NodeId scores = t.leaky_relu(t.matmul(cat, t.param(att)), 0.2);
  NodeId delta_e = t.segment_softmax(scores, nonempty_segments(adj));
  if (attention_out != nullptr) *attention_out = delta_e;
  NodeId coeff = t.edge_decay(delta_e, adj, g.window_end(), inverse_sqrt_norm(adj, deg));
  return t.add(t.coeff_spmm(coeff, hw, adj), root);
}

std::vector<nn::Parameter*> HawkesGatLayer::params() { return {&weight, &weight_root, &att}; }

GcnLayer::GcnLayer(int d_in, int d_out, const std::string& prefix, Rng& init)
    : weight(prefix + ".w", glorot(d_in, d_out, init)) {}

NodeId GcnLayer::forward(Tape& t, NodeId h, const TemporalGraph& g_dedup,
                         const DegreeVector& deg) {
  const PairIndex& adj = g_dedup.pairs();
  std::vector<double> inv = inverse_sqrt_norm(adj, deg);
  Mat coeff(static_cast<int>(adj.num_pairs()), 1);
  for (std::int64_t p = 0; p < adj.num_pairs(); ++p) coeff.at(static_cast<int>(p), 0) = inv[p];
  NodeId hw = t.matmul(h, t.param(weight));
  return t.coeff_spmm(t.constant(std::move(coeff)), hw, adj);
}

std::vector<nn::Parameter*> GcnLayer::params() { return {&weight}; }

GatLayer::GatLayer(int d_in, int d_out, const std::string& prefix, Rng& init)
    : weight(prefix + ".w", glorot(d_in, d_out, init)),
      att(prefix + ".att", glorot(2 * d_out, 1, init)) {}

NodeId GatLayer::forward(Tape& t, NodeId h, const TemporalGraph& g_dedup,
                         NodeId* attention_out) {
  const PairIndex& adj = g_dedup.pairs();
  NodeId hw = t.matmul(h, t.param(weight));
  if (adj.num_pairs() == 0)
    return t.constant(Mat::zeros(g_dedup.num_nodes(), t.value(hw).cols()));

  std::vector<std::int64_t> src_idx(adj.pair_src.begin(), adj.pair_src.end());
  std::vector<std::int64_t> dst_idx(adj.pair_dst.begin(), adj.pair_dst.end());
  NodeId cat = t.concat_cols(t.gather_rows(hw, std::move(src_idx)),
                             t.gather_rows(hw, std::move(dst_idx)));
  NodeId scores = t.leaky_relu(t.matmul(cat, t.param(att)), 0.2);
  NodeId alpha = t.segment_softmax(scores, nonempty_segments(adj));
  if (attention_out != nullptr) *attention_out = alpha;
  return t.coeff_spmm(alpha, hw, adj);
}

std::vector<nn::Parameter*> GatLayer::params() { return {&weight, &att}; }

LinkDecoder::LinkDecoder(int embed_dim, const std::string& prefix, Rng& init)
    : w1(prefix + ".w1", glorot(2 * embed_dim, embed_dim, init)),
      b1(prefix + ".b1", Mat::zeros(1, embed_dim)),
      w2(prefix + ".w2", glorot(embed_dim, 1, init)),
      b2(prefix + ".b2", Mat::zeros(1, 1)) {}

NodeId LinkDecoder::forward(Tape& t, NodeId h,
                            std::span<const std::pair<std::int32_t, std::int32_t>> pairs) {
  std::vector<std::int64_t> src_idx, dst_idx;
  src_idx.reserve(pairs.size());
  dst_idx.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    src_idx.push_back(i);
    dst_idx.push_back(j);
  }
  NodeId x = t.concat_cols(t.gather_rows(h, std::move(src_idx)),
                           t.gather_rows(h, std::move(dst_idx)));
  NodeId hidden = t.relu(t.add_bias(t.matmul(x, t.param(w1)),
                                    t.param(b1)));
  return t.sigmoid(t.add_bias(t.matmul(hidden, t.param(w2)),
                              t.param(b2)));
}

std::vector<nn::Parameter*> LinkDecoder::params() { return {&w1, &b1, &w2, &b2}; }

Model::Model(Kind kind, const ModelConfig& cfg, std::int32_t num_nodes, Rng& init)
    : kind_(kind), cfg_(cfg), num_nodes_(num_nodes),
      decoder_(cfg.hidden, "dec", init) {
  layers_.reserve(static_cast<std::size_t>(cfg_.layers));
  for (int l = 0; l < cfg_.layers; ++l) {
    const int d_in = l == 0 ? cfg_.feature_dim : cfg_.hidden;
    const std::string prefix = "enc" + std::to_string(l);
    switch (kind_) {
      case Kind::HawkesGcn:
        layers_.emplace_back(HawkesGcnLayer(num_nodes, d_in, cfg_.hidden, cfg_.use_bn, prefix, init));
        break;
      case Kind::HawkesGat:
        layers_.emplace_back(HawkesGatLayer(d_in, cfg_.hidden, prefix, init));
        break;
      case Kind::Gcn:
        layers_.emplace_back(GcnLayer(d_in, cfg_.hidden, prefix, init));
        break;
      case Kind::Gat:
        layers_.emplace_back(GatLayer(d_in, cfg_.hidden, prefix, init));
        break;
    }
  }
}

PreparedGraph Model::prepare(std::shared_ptr<const TemporalGraph> fused) const {
  switch (kind_) {
    case Kind::HawkesGcn:
    case Kind::HawkesGat:
      return {fused, fused->binary_degrees()};
    case Kind::Gcn: {
      auto dedup = std::make_shared<const TemporalGraph>(fused->deduplicated(true));
      DegreeVector deg = dedup->binary_degrees();  // self-loops counted
      return {dedup, std::move(deg)};
    }
    case Kind::Gat: {
      auto dedup = std::make_shared<const TemporalGraph>(fused->deduplicated(false));
      DegreeVector deg = dedup->binary_degrees();
      return {dedup, std::move(deg)};
    }
  }
  throw std::logic_error("unreachable");
}

PreparedGraph Model::prepare_local(std::shared_ptr<const TemporalGraph> local,
                                   const PreparedGraph& full,
                                   std::span<const std::int64_t> local_to_global) const {
  DegreeVector deg;
  deg.values.reserve(local_to_global.size());
  for (std::int64_t g : local_to_global) deg.values.push_back(full.deg[static_cast<std::int32_t>(g)]);
  switch (kind_) {
    case Kind::HawkesGcn:
    case Kind::HawkesGat:
      return {std::move(local), std::move(deg)};
    case Kind::Gcn:
      return {std::make_shared<const TemporalGraph>(local->deduplicated(true)), std::move(deg)};
    case Kind::Gat:
      return {std::make_shared<const TemporalGraph>(local->deduplicated(false)), std::move(deg)};
  }
  throw std::logic_error("unreachable");
}

NodeId Model::encode(Tape& t, const PreparedGraph& prep,
                     std::span<const std::int64_t> local_to_global, bool training,
                     Rng& dropout_rng) {
  const std::int32_t n = prep.graph->num_nodes();
  NodeId h = t.constant(Mat::full(n, cfg_.feature_dim, 1.0));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = std::visit(
        [&](auto& layer) -> NodeId {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, HawkesGcnLayer>)
            return layer.forward(t, h, *prep.graph, prep.deg, local_to_global, training);
          else if constexpr (std::is_same_v<L, HawkesGatLayer>)
            return layer.forward(t, h, *prep.graph, prep.deg, training);
          else if constexpr (std::is_same_v<L, GcnLayer>)
            return layer.forward(t, h, *prep.graph, prep.deg);
          else
            return layer.forward(t, h, *prep.graph);
        },
        layers_[l]);
    if (l + 1 < layers_.size()) {
      h = t.relu(h);
      h = t.dropout(h, cfg_.dropout, dropout_rng, training);
    }
  }
  return h;
}

NodeId Model::decode(Tape& t, NodeId h,
                     std::span<const std::pair<std::int32_t, std::int32_t>> pairs) {
  return decoder_.forward(t, h, pairs);
}

std::vector<nn::Parameter*> Model::parameters() {
  std::vector<nn::Parameter*> out;
  for (Layer& layer : layers_) {
    std::visit([&](auto& l) { auto p = l.params(); out.insert(out.end(), p.begin(), p.end()); },
               layer);
  }
  auto dec = decoder_.params();
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

}  // namespace tgfuse::models
