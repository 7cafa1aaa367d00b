#include "qintent/models.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <tuple>

#include "qintent/error.hpp"
#include "qintent/nn/layers.hpp"

namespace qintent {

using nn::Parameter;
using nn::Tensor;

std::string arch_name(Arch a) {
  switch (a) {
    case Arch::Rnn1: return "rnn1";
    case Arch::Rnn2: return "rnn2";
    case Arch::Rnn3: return "rnn3";
    case Arch::Cnn1: return "cnn1";
  }
  return "?";
}

Arch parse_arch(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != '-' && c != '_') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "rnn1") return Arch::Rnn1;
  if (s == "rnn2") return Arch::Rnn2;
  if (s == "rnn3") return Arch::Rnn3;
  if (s == "cnn1") return Arch::Cnn1;
  throw InvariantError("unknown architecture '" + std::string(text) + "'");
}

ModelSpec ModelSpec::reference(Arch arch, std::size_t input_dim, std::uint64_t seed) {
  ModelSpec s;
  s.arch = arch;
  s.input_dim = input_dim;
  s.seed = seed;
  switch (arch) {
    case Arch::Rnn1: s.hidden = 101; break;
    case Arch::Rnn2:
    case Arch::Rnn3:
      s.hidden = 100;
      s.fc_hidden = 100;
      break;
    case Arch::Cnn1: s.fc_hidden = 50; break;
  }
  return s;
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw InvariantError("input_dim must be positive");
  if (arch == Arch::Cnn1) {
    if (cnn_maps == 0 || cnn_reduced == 0 || cnn_seq_len == 0 || cnn_kernel_width == 0 || fc_hidden == 0)
      throw InvariantError("cnn1 sizes must be positive");
    if (input_dim < cnn_kernel_width)
      throw InvariantError("cnn1 needs input_dim >= " + std::to_string(cnn_kernel_width) + ", got " +
                           std::to_string(input_dim));
  } else {
    if (hidden == 0) throw InvariantError("hidden must be positive");
    if (arch != Arch::Rnn1 && fc_hidden == 0) throw InvariantError("fc_hidden must be positive");
  }
}

std::string ModelSpec::canonical() const {
  std::ostringstream os;
  os << "arch=" << arch_name(arch) << " input_dim=" << input_dim;
  if (arch == Arch::Cnn1) {
    os << " fc_hidden=" << fc_hidden << " cnn_maps=" << cnn_maps << " cnn_reduced=" << cnn_reduced
       << " cnn_seq_len=" << cnn_seq_len << " cnn_kernel_width=" << cnn_kernel_width;
  } else {
    os << " hidden=" << hidden;
    if (arch != Arch::Rnn1) os << " fc_hidden=" << fc_hidden;
  }
  os << " seed=" << seed;
  return os.str();
}

namespace {

void add_linear(std::vector<ParamShape>& out, const std::string& name, std::size_t in, std::size_t o) {
  out.push_back({name + ".weight", {o, in}});
  out.push_back({name + ".bias", {o}});
}

void add_recurrent(std::vector<ParamShape>& out, const std::string& name, std::size_t in,
                   std::size_t rows, std::size_t hidden) {
  out.push_back({name + ".w_ih", {rows, in}});
  out.push_back({name + ".b_ih", {rows}});
  out.push_back({name + ".w_hh", {rows, hidden}});
  out.push_back({name + ".b_hh", {rows}});
}

}  // namespace

std::vector<ParamShape> parameter_layout(const ModelSpec& s) {
  s.validate();
  std::vector<ParamShape> out;
  const std::size_t E = s.input_dim;
  switch (s.arch) {
    case Arch::Rnn1:
      add_recurrent(out, "rnn", E, s.hidden, s.hidden);
      add_linear(out, "fc", s.hidden, kNumIntents);
      break;
    case Arch::Rnn2:
      add_recurrent(out, "rnn", E, s.hidden, s.hidden);
      add_linear(out, "fc1", s.hidden, s.fc_hidden);
      add_linear(out, "fc2", s.fc_hidden, kNumIntents);
      break;
    case Arch::Rnn3:
      add_recurrent(out, "lstm1", E, 4 * s.hidden, s.hidden);
      add_recurrent(out, "lstm2", s.hidden, 4 * s.hidden, s.hidden);
      add_linear(out, "fc1", s.hidden, s.fc_hidden);
      add_linear(out, "fc2", s.fc_hidden, s.fc_hidden);
      add_linear(out, "fc3", s.fc_hidden, kNumIntents);
      break;
    case Arch::Cnn1:
      for (std::size_t h = 1; h <= s.cnn_seq_len; ++h) {
        const std::string n = "conv" + std::to_string(h);
        out.push_back({n + ".kernel", {s.cnn_maps, 1, h, s.cnn_kernel_width}});
        out.push_back({n + ".bias", {s.cnn_maps}});
      }
      out.push_back({"reduce.kernel", {s.cnn_reduced, s.cnn_maps, 1}});
      out.push_back({"reduce.bias", {s.cnn_reduced}});
      add_linear(out, "fc1", s.cnn_reduced * (E - s.cnn_kernel_width + 1), s.fc_hidden);
      add_linear(out, "fc2", s.fc_hidden, kNumIntents);
      break;
  }
  return out;
}

std::size_t count_params(const ModelSpec& spec) {
  std::size_t n = 0;
  for (const auto& p : parameter_layout(spec)) n += nn::shape_size(p.shape);
  return n;
}

std::vector<const Parameter*> IntentModel::parameters() const {
  auto ps = const_cast<IntentModel*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

std::size_t IntentModel::num_parameters() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

void IntentModel::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0.0);
}

std::vector<double> IntentModel::predict(const Tensor& sequence) const {
  return nn::softmax(logits(sequence));
}

namespace {

void check_sequence(const Tensor& seq, std::size_t dim) {
  if (seq.rank() != 2 || seq.dim(0) == 0 || seq.dim(1) != dim)
    throw ShapeError("sequence " + seq.shape_str() + " for input_dim " + std::to_string(dim));
}

template <class T>
const T& cache_as(const ForwardCache& c) {
  const auto* p = dynamic_cast<const T*>(&c);
  if (!p) throw InvariantError("forward cache belongs to a different architecture");
  return *p;
}

std::vector<Parameter*> concat(std::initializer_list<std::vector<Parameter*>> parts) {
  std::vector<Parameter*> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// RNN-1 and RNN-2 share the recurrence; RNN-2 adds relu and two FC layers.
class SimpleRnnModel final : public IntentModel {
 public:
  explicit SimpleRnnModel(const ModelSpec& s) : IntentModel(s), cell_("rnn", s.input_dim, s.hidden) {
    if (s.arch == Arch::Rnn1) {
      fc_.emplace_back("fc", s.hidden, kNumIntents);
    } else {
      fc_.emplace_back("fc1", s.hidden, s.fc_hidden);
      fc_.emplace_back("fc2", s.fc_hidden, kNumIntents);
    }
    nn::Rng rng(s.seed);
    cell_.init(rng);
    for (auto& l : fc_) l.init(rng);
  }

  struct Cache : ForwardCache {
    Tensor seq;
    std::vector<std::vector<double>> h;  // h[0] = zeros, h[t+1] after token t
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> fc_in;  // input of each FC layer
  };

  std::vector<double> logits(const Tensor& seq, std::unique_ptr<ForwardCache>* cache) const override {
    check_sequence(seq, spec_.input_dim);
    auto c = std::make_unique<Cache>();
    c->h.emplace_back(spec_.hidden, 0.0);
    for (std::size_t t = 0; t < seq.dim(0); ++t) {
      std::vector<double> pre;
      c->h.push_back(cell_.forward(seq.row(t), c->h.back(), &pre));
      c->pre.push_back(std::move(pre));
    }
    std::vector<double> x = spec_.arch == Arch::Rnn1 ? c->h.back() : nn::relu(c->h.back());
    for (const auto& l : fc_) {
      c->fc_in.push_back(x);
      x = l.forward(x);
    }
    if (cache) {
      c->seq = seq;
      *cache = std::move(c);
    }
    return x;
  }

  void backward(const ForwardCache& base, std::span<const double> dlogits) override {
    const auto& c = cache_as<Cache>(base);
    std::vector<double> d(dlogits.begin(), dlogits.end());
    for (std::size_t k = fc_.size(); k-- > 0;) d = fc_[k].backward(c.fc_in[k], d);
    if (spec_.arch != Arch::Rnn1) d = nn::relu_backward(c.h.back(), d);
    std::vector<double> dprev;
    for (std::size_t t = c.pre.size(); t-- > 0;) {
      cell_.backward(c.seq.row(t), c.h[t], c.pre[t], d, nullptr, &dprev);
      d.swap(dprev);
    }
  }

  std::vector<Parameter*> parameters() override {
    auto out = cell_.parameters();
    for (auto& l : fc_) {
      auto p = l.parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

 private:
  nn::RnnCell cell_;
  std::vector<nn::Linear> fc_;
};

class LstmModel final : public IntentModel {
 public:
  explicit LstmModel(const ModelSpec& s)
      : IntentModel(s),
        l1_("lstm1", s.input_dim, s.hidden),
        l2_("lstm2", s.hidden, s.hidden),
        fc1_("fc1", s.hidden, s.fc_hidden),
        fc2_("fc2", s.fc_hidden, s.fc_hidden),
        fc3_("fc3", s.fc_hidden, kNumIntents) {
    nn::Rng rng(s.seed);
    l1_.init(rng);
    l2_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
    fc3_.init(rng);
  }

  struct Cache : ForwardCache {
    std::vector<nn::LstmCell::Step> s1, s2;
    std::vector<double> h_last, r, a1, a2;
  };

  std::vector<double> logits(const Tensor& seq, std::unique_ptr<ForwardCache>* cache) const override {
    check_sequence(seq, spec_.input_dim);
    auto c = std::make_unique<Cache>();
    const std::size_t n = spec_.hidden;
    std::vector<double> h1(n, 0.0), c1(n, 0.0), h2(n, 0.0), c2(n, 0.0);
    for (std::size_t t = 0; t < seq.dim(0); ++t) {
      nn::LstmCell::Step a, b;
      std::tie(h1, c1) = l1_.forward(seq.row(t), h1, c1, &a);
      std::tie(h2, c2) = l2_.forward(h1, h2, c2, &b);
      c->s1.push_back(std::move(a));
      c->s2.push_back(std::move(b));
    }
    c->h_last = h2;
    c->r = nn::relu(h2);
    c->a1 = fc1_.forward(c->r);
    c->a2 = fc2_.forward(c->a1);
    auto out = fc3_.forward(c->a2);
    if (cache) *cache = std::move(c);
    return out;
  }

  void backward(const ForwardCache& base, std::span<const double> dlogits) override {
    const auto& c = cache_as<Cache>(base);
    auto d = fc3_.backward(c.a2, dlogits);
    d = fc2_.backward(c.a1, d);
    d = fc1_.backward(c.r, d);
    d = nn::relu_backward(c.h_last, d);
    const std::size_t T = c.s2.size(), n = spec_.hidden;
    std::vector<std::vector<double>> dh1_in(T);
    std::vector<double> dh = d, dc(n, 0.0), dx, dhp, dcp;
    for (std::size_t t = T; t-- > 0;) {
      l2_.backward(c.s2[t], dh, dc, &dx, &dhp, &dcp);
      dh1_in[t] = std::move(dx);
      dh.swap(dhp);
      dc.swap(dcp);
    }
    dh.assign(n, 0.0);
    dc.assign(n, 0.0);
    for (std::size_t t = T; t-- > 0;) {
      for (std::size_t k = 0; k < n; ++k) dh[k] += dh1_in[t][k];
      l1_.backward(c.s1[t], dh, dc, nullptr, &dhp, &dcp);
      dh.swap(dhp);
      dc.swap(dcp);
    }
  }

  std::vector<Parameter*> parameters() override {
    return concat({l1_.parameters(), l2_.parameters(), fc1_.parameters(), fc2_.parameters(),
                   fc3_.parameters()});
  }

 private:
  nn::LstmCell l1_, l2_;
  nn::Linear fc1_, fc2_, fc3_;
};

class CnnModel final : public IntentModel {
 public:
  explicit CnnModel(const ModelSpec& s)
      : IntentModel(s),
        reduce_("reduce", s.cnn_maps, s.cnn_reduced, 1),
        fc1_("fc1", s.cnn_reduced * (s.input_dim - s.cnn_kernel_width + 1), s.fc_hidden),
        fc2_("fc2", s.fc_hidden, kNumIntents) {
    for (std::size_t h = 1; h <= s.cnn_seq_len; ++h)
      convs_.emplace_back("conv" + std::to_string(h), 1, s.cnn_maps, h, s.cnn_kernel_width);
    nn::Rng rng(s.seed);
    for (auto& c : convs_) c.init(rng);
    reduce_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
  }

  struct Cache : ForwardCache {
    Tensor input;                 // 1 x L x E
    std::vector<Tensor> conv_pre;  // maps x (L-h+1) x W
    Tensor concat;                // maps x positions x W, after relu
    std::vector<std::size_t> argmax;
    Tensor pooled;                // maps x W
    Tensor reduced_pre;           // reduced x W
    std::vector<double> flat, fc1_pre, fc1_out;
  };

  std::vector<double> logits(const Tensor& seq, std::unique_ptr<ForwardCache>* cache) const override {
    check_sequence(seq, spec_.input_dim);
    const std::size_t L = spec_.cnn_seq_len, E = spec_.input_dim, M = spec_.cnn_maps;
    const std::size_t W = E - spec_.cnn_kernel_width + 1;
    auto c = std::make_unique<Cache>();
    // Pad with zero rows or keep the first L tokens.
    c->input = Tensor({1, L, E});
    const std::size_t T = std::min(L, seq.dim(0));
    std::copy_n(seq.data().begin(), T * E, c->input.data().begin());

    std::size_t positions = 0;
    for (const auto& conv : convs_) {
      c->conv_pre.push_back(conv.forward(c->input));
      positions += c->conv_pre.back().dim(1);
    }
    c->concat = Tensor({M, positions, W});
    std::size_t offset = 0;
    for (const auto& pre : c->conv_pre) {
      const std::size_t P = pre.dim(1);
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t p = 0; p < P; ++p)
          for (std::size_t w = 0; w < W; ++w) {
            const double v = pre.at(m, p, w);
            c->concat.at(m, offset + p, w) = v > 0 ? v : 0.0;
          }
      offset += P;
    }
    c->pooled = nn::max_over_axis(c->concat, 1, &c->argmax);
    c->reduced_pre = reduce_.forward(c->pooled);
    c->flat = nn::relu(c->reduced_pre.data());
    c->fc1_pre = fc1_.forward(c->flat);
    c->fc1_out = nn::relu(c->fc1_pre);
    auto out = fc2_.forward(c->fc1_out);
    if (cache) *cache = std::move(c);
    return out;
  }

  void backward(const ForwardCache& base, std::span<const double> dlogits) override {
    const auto& c = cache_as<Cache>(base);
    auto d = fc2_.backward(c.fc1_out, dlogits);
    d = nn::relu_backward(c.fc1_pre, d);
    d = fc1_.backward(c.flat, d);
    d = nn::relu_backward(c.reduced_pre.data(), d);
    const Tensor dreduced(c.reduced_pre.shape(), std::move(d));
    const Tensor dpooled = reduce_.backward(c.pooled, dreduced);
    const Tensor dconcat = nn::max_over_axis_backward(c.concat.shape(), c.argmax, dpooled);
    const std::size_t M = spec_.cnn_maps, W = c.concat.dim(2);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < convs_.size(); ++k) {
      const Tensor& pre = c.conv_pre[k];
      const std::size_t P = pre.dim(1);
      Tensor dpre(pre.shape());
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t p = 0; p < P; ++p)
          for (std::size_t w = 0; w < W; ++w)
            if (pre.at(m, p, w) > 0) dpre.at(m, p, w) = dconcat.at(m, offset + p, w);
      convs_[k].backward(c.input, dpre);
      offset += P;
    }
  }

  std::vector<Parameter*> parameters() override {
    std::vector<Parameter*> out;
    for (auto& c : convs_) {
      auto p = c.parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    return concat({out, reduce_.parameters(), fc1_.parameters(), fc2_.parameters()});
  }

 private:
  std::vector<nn::Conv2d> convs_;
  nn::Conv1d reduce_;
  nn::Linear fc1_, fc2_;
};

}  // namespace

std::unique_ptr<IntentModel> build(const ModelSpec& spec) {
  spec.validate();
  switch (spec.arch) {
    case Arch::Rnn1:
    case Arch::Rnn2: return std::make_unique<SimpleRnnModel>(spec);
    case Arch::Rnn3: return std::make_unique<LstmModel>(spec);
    case Arch::Cnn1: return std::make_unique<CnnModel>(spec);
  }
  throw InvariantError("unknown architecture");
}

std::optional<Tensor> embed_tokens(const std::vector<std::string>& tokens, const EmbeddingTable& emb) {
  std::vector<double> data;
  std::vector<double> buf(emb.dim());
  std::size_t rows = 0;
  for (const auto& t : tokens) {
    if (!emb.lookup(t, buf)) continue;
    data.insert(data.end(), buf.begin(), buf.end());
    ++rows;
  }
  if (rows == 0) return std::nullopt;
  return Tensor({rows, emb.dim()}, std::move(data));
}

std::optional<IntentDistribution> forward_query(const IntentModel& model,
                                                const std::vector<std::string>& tokens,
                                                const EmbeddingTable& emb) {
  auto seq = embed_tokens(tokens, emb);
  if (!seq) return std::nullopt;
  const auto y = model.predict(*seq);
  return IntentDistribution({y[0], y[1], y[2]});
}

}  // namespace qintent
