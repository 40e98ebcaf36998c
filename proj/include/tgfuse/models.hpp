#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tgfuse/graph.hpp"
#include "tgfuse/tape.hpp"

namespace tgfuse::models {

enum class Kind { HawkesGcn, HawkesGat, Gcn, Gat };

Kind kind_from_string(const std::string& s);
std::string kind_to_string(Kind k);

struct ModelConfig {
  int feature_dim = 64;  // width of the all-ones input features
  int hidden = 64;
  int layers = 2;
  double dropout = 0.1;
  bool use_bn = false;
};

// Graph in the form a model kind consumes, plus matching degrees:
// Hawkes kinds aggregate over the fused multigraph with binary degrees;
// plain kinds see parallel edges collapsed and timestamps discarded, with a
// self-loop per node for GCN.
struct PreparedGraph {
  std::shared_ptr<const TemporalGraph> graph;
  DegreeVector deg;
};

// 1/sqrt(deg(src) * deg(dst)) per pair; zero degrees count as 1.
std::vector<double> inverse_sqrt_norm(const PairIndex& adj, const DegreeVector& deg);

// Time-decayed graph convolution: per-source learnable decay rate
// softplus(delta_raw), degree-normalized aggregation plus a root transform
// realizing the process base rate.
struct HawkesGcnLayer {
  nn::Parameter weight;
  nn::Parameter weight_root;
  nn::Parameter delta_raw;  // num_nodes x 1, decay rate is softplus of this
  bool use_bn = false;

  HawkesGcnLayer(std::int32_t num_nodes, int d_in, int d_out, bool bn,
                 const std::string& prefix, Rng& init);
  nn::NodeId forward(nn::Tape& t, nn::NodeId h, const TemporalGraph& g,
                     const DegreeVector& deg,
                     std::span<const std::int64_t> local_to_global, bool training);
  std::vector<nn::Parameter*> params();
};

// Time-decayed attention convolution: the per-pair decay rate is the
// attention weight softmaxed over each source's unique neighbors.
struct HawkesGatLayer {
  nn::Parameter weight;
  nn::Parameter weight_root;
  nn::Parameter att;  // 2*d_out x 1

  HawkesGatLayer(int d_in, int d_out, const std::string& prefix, Rng& init);
  // attention_out, when non-null, receives the per-pair softmax node.
  nn::NodeId forward(nn::Tape& t, nn::NodeId h, const TemporalGraph& g,
                     const DegreeVector& deg, bool training,
                     nn::NodeId* attention_out = nullptr);
  std::vector<nn::Parameter*> params();
};

// Plain GCN layer; expects a deduplicated graph (self-loops included when
// built through Model::prepare) and degrees counting those loops.
struct GcnLayer {
  nn::Parameter weight;

  GcnLayer(int d_in, int d_out, const std::string& prefix, Rng& init);
  nn::NodeId forward(nn::Tape& t, nn::NodeId h, const TemporalGraph& g_dedup,
                     const DegreeVector& deg);
  std::vector<nn::Parameter*> params();
};

// Plain single-head GAT layer over a deduplicated graph, no self-loops:
// nodes without neighbors produce a zero row.
struct GatLayer {
  nn::Parameter weight;
  nn::Parameter att;

  GatLayer(int d_in, int d_out, const std::string& prefix, Rng& init);
  nn::NodeId forward(nn::Tape& t, nn::NodeId h, const TemporalGraph& g_dedup,
                     nn::NodeId* attention_out = nullptr);
  std::vector<nn::Parameter*> params();
};

// Two-layer MLP scoring a node pair from concatenated embeddings, sigmoid
// output in (0,1). Embeddings are computed once and gathered per pair.
struct LinkDecoder {
  nn::Parameter w1, b1, w2, b2;

  LinkDecoder(int embed_dim, const std::string& prefix, Rng& init);
  nn::NodeId forward(nn::Tape& t, nn::NodeId h,
                     std::span<const std::pair<std::int32_t, std::int32_t>> pairs);
  std::vector<nn::Parameter*> params();
};

// Encoder stack of one kind plus the link decoder. Input node features are
// fixed all-ones rows of width feature_dim.
class Model {
 public:
  Model(Kind kind, const ModelConfig& cfg, std::int32_t num_nodes, Rng& init);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  Kind kind() const { return kind_; }
  const ModelConfig& config() const { return cfg_; }
  std::int32_t num_nodes() const { return num_nodes_; }

  PreparedGraph prepare(std::shared_ptr<const TemporalGraph> fused) const;
  // Prepares a sampled subgraph; degrees are gathered from the full
  // preparation so normalization matches the full graph.
  PreparedGraph prepare_local(std::shared_ptr<const TemporalGraph> local,
                              const PreparedGraph& full,
                              std::span<const std::int64_t> local_to_global) const;

  // Embeddings for every node of prep.graph. local_to_global is empty for
  // full-graph forward passes.
  nn::NodeId encode(nn::Tape& t, const PreparedGraph& prep,
                    std::span<const std::int64_t> local_to_global, bool training,
                    Rng& dropout_rng);
  nn::NodeId decode(nn::Tape& t, nn::NodeId h,
                    std::span<const std::pair<std::int32_t, std::int32_t>> pairs);

  std::vector<nn::Parameter*> parameters();

 private:
  using Layer = std::variant<HawkesGcnLayer, HawkesGatLayer, GcnLayer, GatLayer>;
  Kind kind_;
  ModelConfig cfg_;
  std::int32_t num_nodes_;
  std::vector<Layer> layers_;
  LinkDecoder decoder_;
};

}  // namespace tgfuse::models
