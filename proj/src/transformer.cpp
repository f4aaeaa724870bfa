/* Copyright 2026 The xlamr Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "xlamr/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xlamr/rng.hpp"

namespace xlamr {

namespace {

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

constexpr double kLayerNormEps = 1e-5;

struct LnIdx {
  std::size_t g, b;
};
struct LinIdx {
  std::size_t w, b;
};
struct AttnIdx {
  LinIdx q, k, v, o;
};
struct FfIdx {
  LinIdx in, out;
};
struct EncIdx {
  LnIdx ln1;
  AttnIdx att;
  LnIdx ln2;
  FfIdx ff;
};
struct DecIdx {
  LnIdx ln1;
  AttnIdx self;
  LnIdx ln2;
  AttnIdx cross;
  LnIdx ln3;
  FfIdx ff;
};

// A block of query rows attending to a block of key rows.
struct Segment {
  int q_off, q_len, k_off, k_len;
  bool causal;
};

template <typename T>
struct LnCache {
  MatT<T> xhat;
  VecT<T> rstd;
};

template <typename T>
struct AttnCache {
  MatT<T> xq, xkv, q, k, v, ctx, mask;
  std::vector<MatT<T>> probs;
};

template <typename T>
struct FfCache {
  MatT<T> x, pre, act, mask;
};

template <typename T>
struct EncLayerCache {
  LnCache<T> ln1, ln2;
  AttnCache<T> att;
  FfCache<T> ff;
};

template <typename T>
struct DecLayerCache {
  LnCache<T> ln1, ln2, ln3;
  AttnCache<T> self, cross;
  FfCache<T> ff;
};

ModelError Shape(const std::string& what) {
  return ModelError(ModelError::Kind::kShapeMismatch, what);
}

template <typename T>
MatT<T> LayerNorm(const MatT<T>& x, const ParamSet<T>& ps, const LnIdx& idx,
                  LnCache<T>* cache) {
  const Eigen::Index n = x.rows();
  MatT<T> xhat(n, x.cols());
  VecT<T> rstd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mu = x.row(i).mean();
    const T var = (x.row(i).array() - mu).square().mean();
    const T r = T(1) / std::sqrt(var + T(kLayerNormEps));
    xhat.row(i) = (x.row(i).array() - mu) * r;
    rstd(i) = r;
  }
  MatT<T> y = (xhat.array().rowwise() * ps.view(idx.g).row(0).array()).matrix();
  y.rowwise() += ps.view(idx.b).row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename T>
MatT<T> LayerNormBwd(const MatT<T>& dy, const LnCache<T>& c, const ParamSet<T>& ps,
                     const LnIdx& idx, std::vector<T>& grad) {
  ps.view(grad, idx.g).row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  ps.view(grad, idx.b).row(0) += dy.colwise().sum();
  MatT<T> dxhat = (dy.array().rowwise() * ps.view(idx.g).row(0).array()).matrix();
  const T inv_d = T(1) / T(dy.cols());
  MatT<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const T m1 = dxhat.row(i).sum() * inv_d;
    const T m2 = dxhat.row(i).dot(c.xhat.row(i)) * inv_d;
    dx.row(i) = (c.rstd(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2)).matrix();
  }
  return dx;
}

template <typename T>
MatT<T> Linear(const MatT<T>& x, const ParamSet<T>& ps, const LinIdx& idx) {
  MatT<T> y(x.rows(), ps.info()[idx.w].cols);
  y.noalias() = x * ps.view(idx.w);
  y.rowwise() += ps.view(idx.b).row(0);
  return y;
}

template <typename T>
MatT<T> LinearBwd(const MatT<T>& dy, const MatT<T>& x, const ParamSet<T>& ps,
                  const LinIdx& idx, std::vector<T>& grad) {
  auto dw = ps.view(grad, idx.w);
  dw.noalias() += x.transpose() * dy;
  ps.view(grad, idx.b).row(0) += dy.colwise().sum();
  MatT<T> dx(dy.rows(), x.cols());
  dx.noalias() = dy * ps.view(idx.w).transpose();
  return dx;
}

template <typename T>
void SoftmaxRow(Eigen::Ref<VecT<T>> row) {
  const T mx = row.maxCoeff();
  row = (row.array() - mx).exp();
  row /= row.sum();
}

template <typename T>
MatT<T> Attention(const MatT<T>& q, const MatT<T>& k, const MatT<T>& v,
                  const std::vector<Segment>& segs, int heads,
                  std::vector<MatT<T>>& probs) {
  const int dk = static_cast<int>(q.cols()) / heads;
  const T scale = T(1) / std::sqrt(T(dk));
  MatT<T> ctx = MatT<T>::Zero(q.rows(), q.cols());
  probs.clear();
  probs.reserve(segs.size() * static_cast<std::size_t>(heads));
  for (const auto& s : segs) {
    for (int h = 0; h < heads; ++h) {
      MatT<T> p(s.q_len, s.k_len);
      p.noalias() = q.block(s.q_off, h * dk, s.q_len, dk) *
                    k.block(s.k_off, h * dk, s.k_len, dk).transpose();
      p *= scale;
      for (int i = 0; i < s.q_len; ++i) {
        const int lim = s.causal ? std::min(i + 1, s.k_len) : s.k_len;
        auto live = p.row(i).head(lim);
        const T mx = live.maxCoeff();
        live = (live.array() - mx).exp().matrix();
        live /= live.sum();
        if (lim < s.k_len) p.row(i).tail(s.k_len - lim).setZero();
      }
      ctx.block(s.q_off, h * dk, s.q_len, dk).noalias() =
          p * v.block(s.k_off, h * dk, s.k_len, dk);
      probs.push_back(std::move(p));
    }
  }
  return ctx;
}

template <typename T>
void AttentionBwd(const MatT<T>& dctx, const AttnCache<T>& c,
                  const std::vector<Segment>& segs, int heads, MatT<T>& dq,
                  MatT<T>& dk, MatT<T>& dv) {
  const int d = static_cast<int>(c.q.cols());
  const int hd = d / heads;
  const T scale = T(1) / std::sqrt(T(hd));
  dq = MatT<T>::Zero(c.q.rows(), d);
  dk = MatT<T>::Zero(c.k.rows(), d);
  dv = MatT<T>::Zero(c.v.rows(), d);
  std::size_t idx = 0;
  for (const auto& s : segs) {
    for (int h = 0; h < heads; ++h) {
      const MatT<T>& p = c.probs[idx++];
      auto dcb = dctx.block(s.q_off, h * hd, s.q_len, hd);
      dv.block(s.k_off, h * hd, s.k_len, hd).noalias() += p.transpose() * dcb;
      MatT<T> dp(s.q_len, s.k_len);
      dp.noalias() = dcb * c.v.block(s.k_off, h * hd, s.k_len, hd).transpose();
      VecT<T> r = (dp.array() * p.array()).rowwise().sum();
      MatT<T> ds = (p.array() * (dp.array().colwise() - r.array())).matrix() * scale;
      dq.block(s.q_off, h * hd, s.q_len, hd).noalias() +=
          ds * c.k.block(s.k_off, h * hd, s.k_len, hd);
      dk.block(s.k_off, h * hd, s.k_len, hd).noalias() +=
          ds.transpose() * c.q.block(s.q_off, h * hd, s.q_len, hd);
    }
  }
}

template <typename T>
MatT<T> AttnFwd(const ParamSet<T>& ps, const AttnIdx& a, const MatT<T>& xq,
                const MatT<T>& xkv, const std::vector<Segment>& segs, int heads,
                AttnCache<T>& c) {
  c.q = Linear(xq, ps, a.q);
  c.k = Linear(xkv, ps, a.k);
  c.v = Linear(xkv, ps, a.v);
  c.ctx = Attention(c.q, c.k, c.v, segs, heads, c.probs);
  c.xq = xq;
  c.xkv = xkv;
  return Linear(c.ctx, ps, a.o);
}

// Returns the gradient w.r.t. the query input; key/value input gradient is
// added to `dxkv`.
template <typename T>
MatT<T> AttnBwd(const ParamSet<T>& ps, const AttnIdx& a, const MatT<T>& dout,
                const AttnCache<T>& c, const std::vector<Segment>& segs, int heads,
                std::vector<T>& grad, MatT<T>& dxkv) {
  MatT<T> dctx = LinearBwd(dout, c.ctx, ps, a.o, grad);
  MatT<T> dq, dk, dv;
  AttentionBwd(dctx, c, segs, heads, dq, dk, dv);
  dxkv += LinearBwd(dk, c.xkv, ps, a.k, grad);
  dxkv += LinearBwd(dv, c.xkv, ps, a.v, grad);
  return LinearBwd(dq, c.xq, ps, a.q, grad);
}

template <typename T>
MatT<T> FfFwd(const ParamSet<T>& ps, const FfIdx& f, const MatT<T>& x,
              FfCache<T>* c) {
  MatT<T> pre = Linear(x, ps, f.in);
  MatT<T> act = pre.cwiseMax(T(0));
  MatT<T> y = Linear(act, ps, f.out);
  if (c) {
    c->x = x;
    c->pre = std::move(pre);
    c->act = std::move(act);
  }
  return y;
}

template <typename T>
MatT<T> FfBwd(const ParamSet<T>& ps, const FfIdx& f, const MatT<T>& dy,
              const FfCache<T>& c, std::vector<T>& grad) {
  MatT<T> dact = LinearBwd(dy, c.act, ps, f.out, grad);
  dact.array() *= (c.pre.array() > T(0)).template cast<T>();
  return LinearBwd(dact, c.x, ps, f.in, grad);
}

template <typename T>
void ApplyMask(MatT<T>& x, const MatT<T>& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

// -log softmax(row)[target] with optional label smoothing.
template <typename Row>
double TokenLoss(const Row& row, TokenId target, double smoothing) {
  const double mx = static_cast<double>(row.maxCoeff());
  double sum = 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double x = static_cast<double>(row(j));
    sum += std::exp(x - mx);
    total += x;
  }
  const double lse = mx + std::log(sum);
  const double n = static_cast<double>(row.size());
  return lse - (1.0 - smoothing) * static_cast<double>(row(target)) -
         smoothing * total / n;
}

void CheckIds(const TokenIds& ids, int vocab) {
  for (TokenId t : ids) {
    if (t < 0 || t >= vocab) throw Shape("token id " + std::to_string(t) + " outside vocabulary");
  }
}

TokenIds StripTrailingPad(const TokenIds& ids) {
  auto end = ids.end();
  while (end != ids.begin() && *(end - 1) == kPad) --end;
  return TokenIds(ids.begin(), end);
}

}  // namespace

void ModelConfig::validate() const {
  auto bad = [](const std::string& m) {
    return ModelError(ModelError::Kind::kBadConfig, "model config: " + m);
  };
  if (layers < 1) throw bad("layers must be positive");
  if (d_model < 1 || heads < 1 || d_model % heads != 0) {
    throw bad("d_model must be a positive multiple of heads");
  }
  if (d_ff < 1) throw bad("d_ff must be positive");
  if (vocab_size <= kNumSpecials) throw bad("vocab_size must exceed the special tokens");
  if (max_len < 2) throw bad("max_len must be at least 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw bad("dropout must lie in [0, 1)");
  if (!(loss_weight_amr >= 0.0) || !(loss_weight_eng >= 0.0)) {
    throw bad("loss weights must be non-negative");
  }
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw bad("label_smoothing must lie in [0, 1)");
  }
}

bool IsDecoderParam(const std::string& name) {
  return name.rfind("dec.", 0) == 0 || name.rfind("out.", 0) == 0;
}

double DecodeResult::score() const {
  const double len = static_cast<double>(ids.size()) + (truncated ? 0.0 : 1.0);
  return log_prob / std::max(1.0, len);
}

template <typename T>
std::size_t ParamSet<T>::add(const std::string& name, int rows, int cols) {
  ParamInfo p{name, rows, cols, data_.size()};
  data_.resize(data_.size() + p.size());
  info_.push_back(std::move(p));
  return info_.size() - 1;
}

template <typename T>
const ParamInfo* ParamSet<T>::find(const std::string& name) const {
  for (const auto& p : info_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
struct Transformer<T>::Layout {
  std::size_t emb = 0;
  std::vector<EncIdx> enc;
  LnIdx enc_ln{};
  std::vector<DecIdx> dec;
  LnIdx dec_ln{};
  LinIdx out{};
  MatT<T> pe;  // sinusoidal position table, max_len x d_model
};

template <typename T>
struct Transformer<T>::Cache {
  Cache(bool train_mode, double p, std::uint64_t seed)
      : train(train_mode), drop(p), rng(seed) {}

  MatT<T> Mask(Eigen::Index rows, Eigen::Index cols) {
    if (!train || drop <= 0.0) return {};
    MatT<T> m(rows, cols);
    const T keep = T(1.0 / (1.0 - drop));
    const auto threshold = static_cast<std::uint64_t>(drop * 0x1.0p64);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = rng.next() < threshold ? T(0) : keep;
    }
    return m;
  }

  bool train;
  double drop;
  Rng rng;

  std::vector<int> src_off, src_len;
  std::vector<TokenId> src_tok;
  std::vector<int> src_pos;
  std::vector<Segment> enc_segs;
  MatT<T> enc_mask0;
  std::vector<EncLayerCache<T>> enc;
  LnCache<T> enc_ln;
  MatT<T> memory;

  std::vector<int> dec_off, dec_len;
  std::vector<TokenId> dec_tok;
  std::vector<int> dec_pos;
  std::vector<Segment> self_segs, cross_segs;
  MatT<T> dec_mask0;
  std::vector<DecLayerCache<T>> dec;
  LnCache<T> dec_ln;
  MatT<T> out;
};

template <typename T>
struct Transformer<T>::Memory {
  std::vector<int> off, len;
  std::vector<MatT<T>> k, v;  // cross-attention keys/values per layer
};

template <typename T>
struct Transformer<T>::Hypothesis {
  int source = 0;
  TokenIds tokens;  // starts with the task BOS
  std::vector<MatT<T>> k, v;  // self-attention cache per layer
  double log_prob = 0.0;
};

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config) : config_(config) {
  config_.validate();
  const int d = config_.d_model;
  const int f = config_.d_ff;
  ParamSet<T>& ps = params_;
  auto layout = std::make_shared<Layout>();
  auto ln = [&](const std::string& n) {
    return LnIdx{ps.add(n + ".g", 1, d), ps.add(n + ".b", 1, d)};
  };
  auto lin = [&](const std::string& n, int in, int out) {
    return LinIdx{ps.add(n + ".w", in, out), ps.add(n + ".b", 1, out)};
  };
  auto attn = [&](const std::string& n) {
    return AttnIdx{lin(n + ".q", d, d), lin(n + ".k", d, d), lin(n + ".v", d, d),
                   lin(n + ".o", d, d)};
  };
  auto ff = [&](const std::string& n) {
    return FfIdx{lin(n + ".ff1", d, f), lin(n + ".ff2", f, d)};
  };

  layout->emb = ps.add("emb", config_.vocab_size, d);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string n = "enc." + std::to_string(l);
    EncIdx e;
    e.ln1 = ln(n + ".ln1");
    e.att = attn(n + ".self");
    e.ln2 = ln(n + ".ln2");
    e.ff = ff(n);
    layout->enc.push_back(e);
  }
  layout->enc_ln = ln("enc.ln");
  for (int l = 0; l < config_.layers; ++l) {
    const std::string n = "dec." + std::to_string(l);
    DecIdx e;
    e.ln1 = ln(n + ".ln1");
    e.self = attn(n + ".self");
    e.ln2 = ln(n + ".ln2");
    e.cross = attn(n + ".cross");
    e.ln3 = ln(n + ".ln3");
    e.ff = ff(n);
    layout->dec.push_back(e);
  }
  layout->dec_ln = ln("dec.ln");
  layout->out = lin("out", d, config_.vocab_size);

  layout->pe.resize(config_.max_len, d);
  for (int pos = 0; pos < config_.max_len; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
      layout->pe(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < d) layout->pe(pos, i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  layout_ = std::move(layout);

  Rng rng(config_.init_seed);
  for (std::size_t i = 0; i < ps.info().size(); ++i) {
    const ParamInfo& p = ps.info()[i];
    auto w = ps.view(i);
    const bool is_bias = p.rows == 1 && p.name.size() > 2 &&
                         p.name.compare(p.name.size() - 2, 2, ".b") == 0;
    const bool is_gain = p.name.size() > 2 &&
                         p.name.compare(p.name.size() - 2, 2, ".g") == 0;
    if (is_gain) {
      w.setOnes();
    } else if (is_bias) {
      w.setZero();
    } else {
      const double a = p.name == "emb" ? std::sqrt(3.0 / d)
                                       : std::sqrt(6.0 / (p.rows + p.cols));
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        w.data()[j] = static_cast<T>((2.0 * rng.uniform() - 1.0) * a);
      }
    }
  }
}

namespace {

template <typename T>
MatT<T> Embed(const ParamSet<T>& ps, std::size_t emb, const MatT<T>& pe,
              const std::vector<TokenId>& toks, const std::vector<int>& pos) {
  const auto e = ps.view(emb);
  const T scale = std::sqrt(T(e.cols()));
  MatT<T> x(static_cast<Eigen::Index>(toks.size()), e.cols());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = e.row(toks[i]) * scale + pe.row(pos[i]);
  }
  return x;
}

template <typename T>
void EmbedBwd(const ParamSet<T>& ps, std::size_t emb, const MatT<T>& dx,
              const std::vector<TokenId>& toks, std::vector<T>& grad) {
  auto g = ps.view(grad, emb);
  const T scale = std::sqrt(T(g.cols()));
  for (std::size_t i = 0; i < toks.size(); ++i) {
    g.row(toks[i]) += dx.row(static_cast<Eigen::Index>(i)) * scale;
  }
}

}  // namespace

template <typename T>
void Transformer<T>::EncodeForward(const std::vector<TokenIds>& sources,
                                   Cache& c) const {
  const Layout& lo = *layout_;
  const int d = config_.d_model;
  for (const auto& src : sources) {
    CheckIds(src, config_.vocab_size);
    const int off = static_cast<int>(c.src_tok.size());
    int len = 0;
    for (TokenId t : src) {
      if (t == kPad) continue;
      c.src_tok.push_back(t);
      c.src_pos.push_back(len++);
    }
    if (len == 0) throw Shape("empty source sequence");
    if (len > config_.max_len) {
      throw ModelError(ModelError::Kind::kPositionOverflow,
                       "source length " + std::to_string(len) + " exceeds max_len");
    }
    c.src_off.push_back(off);
    c.src_len.push_back(len);
    c.enc_segs.push_back({off, len, off, len, false});
  }
  MatT<T> x = Embed(params_, lo.emb, lo.pe, c.src_tok, c.src_pos);
  c.enc_mask0 = c.Mask(x.rows(), d);
  ApplyMask(x, c.enc_mask0);
  c.enc.resize(lo.enc.size());
  for (std::size_t l = 0; l < lo.enc.size(); ++l) {
    const EncIdx& li = lo.enc[l];
    EncLayerCache<T>& lc = c.enc[l];
    MatT<T> h = LayerNorm(x, params_, li.ln1, &lc.ln1);
    MatT<T> a = AttnFwd(params_, li.att, h, h, c.enc_segs, config_.heads, lc.att);
    lc.att.mask = c.Mask(a.rows(), d);
    ApplyMask(a, lc.att.mask);
    x += a;
    h = LayerNorm(x, params_, li.ln2, &lc.ln2);
    MatT<T> f = FfFwd(params_, li.ff, h, &lc.ff);
    lc.ff.mask = c.Mask(f.rows(), d);
    ApplyMask(f, lc.ff.mask);
    x += f;
  }
  c.memory = LayerNorm(x, params_, lo.enc_ln, &c.enc_ln);
}

template <typename T>
void Transformer<T>::DecodeForward(const std::vector<int>& row_source,
                                   const std::vector<TokenIds>& inputs,
                                   Cache& c) const {
  const Layout& lo = *layout_;
  const int d = config_.d_model;
  for (std::size_t r = 0; r < inputs.size(); ++r) {
    const int s = row_source[r];
    if (s < 0 || static_cast<std::size_t>(s) >= c.src_off.size()) {
      throw Shape("decoder row refers to missing source " + std::to_string(s));
    }
    CheckIds(inputs[r], config_.vocab_size);
    const int len = static_cast<int>(inputs[r].size());
    if (len == 0) throw Shape("empty decoder input");
    if (len > config_.max_len) {
      throw ModelError(ModelError::Kind::kPositionOverflow,
                       "target length " + std::to_string(len) + " exceeds max_len");
    }
    const int off = static_cast<int>(c.dec_tok.size());
    for (int t = 0; t < len; ++t) {
      c.dec_tok.push_back(inputs[r][static_cast<std::size_t>(t)]);
      c.dec_pos.push_back(t);
    }
    c.dec_off.push_back(off);
    c.dec_len.push_back(len);
    c.self_segs.push_back({off, len, off, len, true});
    c.cross_segs.push_back({off, len, c.src_off[static_cast<std::size_t>(s)],
                            c.src_len[static_cast<std::size_t>(s)], false});
  }
  MatT<T> y = Embed(params_, lo.emb, lo.pe, c.dec_tok, c.dec_pos);
  c.dec_mask0 = c.Mask(y.rows(), d);
  ApplyMask(y, c.dec_mask0);
  c.dec.resize(lo.dec.size());
  for (std::size_t l = 0; l < lo.dec.size(); ++l) {
    const DecIdx& li = lo.dec[l];
    DecLayerCache<T>& lc = c.dec[l];
    MatT<T> h = LayerNorm(y, params_, li.ln1, &lc.ln1);
    MatT<T> a = AttnFwd(params_, li.self, h, h, c.self_segs, config_.heads, lc.self);
    lc.self.mask = c.Mask(a.rows(), d);
    ApplyMask(a, lc.self.mask);
    y += a;
    h = LayerNorm(y, params_, li.ln2, &lc.ln2);
    a = AttnFwd(params_, li.cross, h, c.memory, c.cross_segs, config_.heads, lc.cross);
    lc.cross.mask = c.Mask(a.rows(), d);
    ApplyMask(a, lc.cross.mask);
    y += a;
    h = LayerNorm(y, params_, li.ln3, &lc.ln3);
    MatT<T> f = FfFwd(params_, li.ff, h, &lc.ff);
    lc.ff.mask = c.Mask(f.rows(), d);
    ApplyMask(f, lc.ff.mask);
    y += f;
  }
  c.out = LayerNorm(y, params_, lo.dec_ln, &c.dec_ln);
}

template <typename T>
void Transformer<T>::Backward(Cache& c, const Mat& d_out, std::vector<T>& grad) const {
  const Layout& lo = *layout_;
  const int heads = config_.heads;
  MatT<T> dy = LayerNormBwd(d_out, c.dec_ln, params_, lo.dec_ln, grad);
  MatT<T> dmem = MatT<T>::Zero(c.memory.rows(), c.memory.cols());
  for (std::size_t l = lo.dec.size(); l-- > 0;) {
    const DecIdx& li = lo.dec[l];
    DecLayerCache<T>& lc = c.dec[l];
    MatT<T> g = dy;
    ApplyMask(g, lc.ff.mask);
    MatT<T> dh = FfBwd(params_, li.ff, g, lc.ff, grad);
    dy += LayerNormBwd(dh, lc.ln3, params_, li.ln3, grad);

    g = dy;
    ApplyMask(g, lc.cross.mask);
    dh = AttnBwd(params_, li.cross, g, lc.cross, c.cross_segs, heads, grad, dmem);
    dy += LayerNormBwd(dh, lc.ln2, params_, li.ln2, grad);

    g = dy;
    ApplyMask(g, lc.self.mask);
    MatT<T> dkv = MatT<T>::Zero(dy.rows(), dy.cols());
    dh = AttnBwd(params_, li.self, g, lc.self, c.self_segs, heads, grad, dkv);
    dh += dkv;
    dy += LayerNormBwd(dh, lc.ln1, params_, li.ln1, grad);
  }
  ApplyMask(dy, c.dec_mask0);
  EmbedBwd(params_, lo.emb, dy, c.dec_tok, grad);

  MatT<T> dx = LayerNormBwd(dmem, c.enc_ln, params_, lo.enc_ln, grad);
  for (std::size_t l = lo.enc.size(); l-- > 0;) {
    const EncIdx& li = lo.enc[l];
    EncLayerCache<T>& lc = c.enc[l];
    MatT<T> g = dx;
    ApplyMask(g, lc.ff.mask);
    MatT<T> dh = FfBwd(params_, li.ff, g, lc.ff, grad);
    dx += LayerNormBwd(dh, lc.ln2, params_, li.ln2, grad);

    g = dx;
    ApplyMask(g, lc.att.mask);
    MatT<T> dkv = MatT<T>::Zero(dx.rows(), dx.cols());
    dh = AttnBwd(params_, li.att, g, lc.att, c.enc_segs, heads, grad, dkv);
    dh += dkv;
    dx += LayerNormBwd(dh, lc.ln1, params_, li.ln1, grad);
  }
  ApplyMask(dx, c.enc_mask0);
  EmbedBwd(params_, lo.emb, dx, c.src_tok, grad);
}

template <typename T>
std::vector<typename Transformer<T>::Mat> Transformer<T>::Forward(
    const std::vector<TokenIds>& sources, const std::vector<TokenIds>& prefixes) const {
  if (sources.size() != prefixes.size()) {
    throw Shape("forward: " + std::to_string(sources.size()) + " sources but " +
                std::to_string(prefixes.size()) + " target prefixes");
  }
  Cache c(false, 0.0, 0);
  EncodeForward(sources, c);
  std::vector<int> row_source(sources.size());
  std::iota(row_source.begin(), row_source.end(), 0);
  std::vector<TokenIds> inputs;
  for (const auto& p : prefixes) inputs.push_back(StripTrailingPad(p));
  DecodeForward(row_source, inputs, c);
  MatT<T> logits = Linear(c.out, params_, layout_->out);
  std::vector<Mat> out;
  for (std::size_t r = 0; r < prefixes.size(); ++r) {
    Mat m = Mat::Zero(static_cast<Eigen::Index>(prefixes[r].size()), config_.vocab_size);
    m.topRows(c.dec_len[r]) = logits.middleRows(c.dec_off[r], c.dec_len[r]);
    out.push_back(std::move(m));
  }
  return out;
}

template <typename T>
LossBreakdown Transformer<T>::Loss(const TrainBatch& batch, std::vector<T>* grad,
                                   bool train, std::uint64_t dropout_seed) const {
  if (grad && grad->size() != params_.size()) throw Shape("gradient buffer size mismatch");
  std::vector<int> row_source;
  std::vector<TokenIds> inputs, golds;
  for (const auto& row : batch.rows) {
    TokenIds gold = StripTrailingPad(row.gold);
    if (gold.empty()) throw Shape("empty gold sequence");
    CheckIds(gold, config_.vocab_size);
    TokenIds input{row.bos};
    input.insert(input.end(), gold.begin(), gold.end() - 1);
    row_source.push_back(row.source);
    inputs.push_back(std::move(input));
    golds.push_back(std::move(gold));
  }
  Cache c(train, config_.dropout, dropout_seed);
  EncodeForward(batch.sources, c);
  DecodeForward(row_source, inputs, c);
  MatT<T> logits = Linear(c.out, params_, layout_->out);

  LossBreakdown out;
  double sum_amr = 0.0, sum_eng = 0.0;
  for (std::size_t r = 0; r < golds.size(); ++r) {
    const bool eng = batch.rows[r].bos == kBosEng;
    for (std::size_t t = 0; t < golds[r].size(); ++t) {
      const TokenId target = golds[r][t];
      if (target == kPad) continue;
      const double l = TokenLoss(logits.row(c.dec_off[r] + static_cast<int>(t)), target,
                                 config_.label_smoothing);
      if (eng) {
        sum_eng += l;
        ++out.tokens_eng;
      } else {
        sum_amr += l;
        ++out.tokens_amr;
      }
    }
  }
  out.loss_amr = out.tokens_amr ? sum_amr / static_cast<double>(out.tokens_amr) : 0.0;
  out.loss_eng = out.tokens_eng ? sum_eng / static_cast<double>(out.tokens_eng) : 0.0;
  out.total = config_.loss_weight_amr * out.loss_amr + config_.loss_weight_eng * out.loss_eng;
  if (!grad) return out;

  const double w_amr =
      out.tokens_amr ? config_.loss_weight_amr / static_cast<double>(out.tokens_amr) : 0.0;
  const double w_eng =
      out.tokens_eng ? config_.loss_weight_eng / static_cast<double>(out.tokens_eng) : 0.0;
  const T eps = static_cast<T>(config_.label_smoothing);
  const T uniform = eps / T(config_.vocab_size);
  MatT<T> dlogits = MatT<T>::Zero(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < golds.size(); ++r) {
    const T w = static_cast<T>(batch.rows[r].bos == kBosEng ? w_eng : w_amr);
    for (std::size_t t = 0; t < golds[r].size(); ++t) {
      const TokenId target = golds[r][t];
      if (target == kPad) continue;
      const Eigen::Index row = c.dec_off[r] + static_cast<Eigen::Index>(t);
      VecT<T> p = logits.row(row).transpose();
      SoftmaxRow<T>(p);
      p.array() -= uniform;
      p(target) -= T(1) - eps;
      dlogits.row(row) = w * p.transpose();
    }
  }
  MatT<T> d_out = LinearBwd(dlogits, c.out, params_, layout_->out, *grad);
  Backward(c, d_out, *grad);
  return out;
}

template <typename T>
typename Transformer<T>::Memory Transformer<T>::Encode(
    const std::vector<TokenIds>& sources) const {
  Cache c(false, 0.0, 0);
  EncodeForward(sources, c);
  Memory m;
  m.off = c.src_off;
  m.len = c.src_len;
  for (const auto& li : layout_->dec) {
    m.k.push_back(Linear(c.memory, params_, li.cross.k));
    m.v.push_back(Linear(c.memory, params_, li.cross.v));
  }
  return m;
}

template <typename T>
typename Transformer<T>::Mat Transformer<T>::Step(const Memory& memory,
                                                  std::vector<Hypothesis*>& hyps) const {
  const Layout& lo = *layout_;
  const int d = config_.d_model;
  const int heads = config_.heads;
  const int hd = d / heads;
  const T scale = T(1) / std::sqrt(T(hd));
  const auto n = static_cast<Eigen::Index>(hyps.size());
  std::vector<TokenId> toks;
  std::vector<int> pos;
  for (const Hypothesis* h : hyps) {
    toks.push_back(h->tokens.back());
    pos.push_back(static_cast<int>(h->tokens.size()) - 1);
  }
  MatT<T> y = Embed(params_, lo.emb, lo.pe, toks, pos);
  VecT<T> scores;
  for (std::size_t l = 0; l < lo.dec.size(); ++l) {
    const DecIdx& li = lo.dec[l];
    MatT<T> h = LayerNorm<T>(y, params_, li.ln1, nullptr);
    MatT<T> q = Linear(h, params_, li.self.q);
    MatT<T> k = Linear(h, params_, li.self.k);
    MatT<T> v = Linear(h, params_, li.self.v);
    MatT<T> ctx(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      Hypothesis& hy = *hyps[static_cast<std::size_t>(i)];
      MatT<T>& kc = hy.k[l];
      MatT<T>& vc = hy.v[l];
      const Eigen::Index t = kc.rows() + 1;
      kc.conservativeResize(t, d);
      vc.conservativeResize(t, d);
      kc.row(t - 1) = k.row(i);
      vc.row(t - 1) = v.row(i);
      for (int hh = 0; hh < heads; ++hh) {
        scores.noalias() = kc.block(0, hh * hd, t, hd) * q.row(i).segment(hh * hd, hd).transpose();
        scores *= scale;
        SoftmaxRow<T>(scores);
        ctx.row(i).segment(hh * hd, hd).noalias() =
            scores.transpose() * vc.block(0, hh * hd, t, hd);
      }
    }
    y += Linear(ctx, params_, li.self.o);

    h = LayerNorm<T>(y, params_, li.ln2, nullptr);
    q = Linear(h, params_, li.cross.q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(hyps[static_cast<std::size_t>(i)]->source);
      const int off = memory.off[s];
      const int len = memory.len[s];
      for (int hh = 0; hh < heads; ++hh) {
        scores.noalias() = memory.k[l].block(off, hh * hd, len, hd) *
                           q.row(i).segment(hh * hd, hd).transpose();
        scores *= scale;
        SoftmaxRow<T>(scores);
        ctx.row(i).segment(hh * hd, hd).noalias() =
            scores.transpose() * memory.v[l].block(off, hh * hd, len, hd);
      }
    }
    y += Linear(ctx, params_, li.cross.o);

    h = LayerNorm<T>(y, params_, li.ln3, nullptr);
    y += FfFwd<T>(params_, li.ff, h, nullptr);
  }
  MatT<T> out = LayerNorm<T>(y, params_, lo.dec_ln, nullptr);
  return Linear(out, params_, lo.out);
}

namespace {

template <typename Row>
std::vector<double> LogSoftmax(const Row& row) {
  std::vector<double> out(static_cast<std::size_t>(row.size()));
  const double mx = static_cast<double>(row.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) sum += std::exp(static_cast<double>(row(j)) - mx);
  const double lse = mx + std::log(sum);
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    out[static_cast<std::size_t>(j)] = static_cast<double>(row(j)) - lse;
  }
  return out;
}

}  // namespace

template <typename T>
std::vector<DecodeResult> Transformer<T>::Greedy(const Memory& memory, TokenId task,
                                                 int max_steps) const {
  const std::size_t n = memory.off.size();
  std::vector<DecodeResult> results(n);
  std::vector<Hypothesis> hyps(n);
  std::vector<std::size_t> active;
  for (std::size_t s = 0; s < n; ++s) {
    hyps[s].source = static_cast<int>(s);
    hyps[s].tokens = {task};
    hyps[s].k.assign(layout_->dec.size(), MatT<T>(0, config_.d_model));
    hyps[s].v.assign(layout_->dec.size(), MatT<T>(0, config_.d_model));
    active.push_back(s);
  }
  const int steps = std::min(max_steps, config_.max_len);
  for (int step = 0; step < steps && !active.empty(); ++step) {
    std::vector<Hypothesis*> ptrs;
    for (std::size_t s : active) ptrs.push_back(&hyps[s]);
    MatT<T> logits = Step(memory, ptrs);
    std::vector<std::size_t> still;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t s = active[i];
      auto row = logits.row(static_cast<Eigen::Index>(i));
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < row.size(); ++j) {
        if (row(j) > row(best)) best = j;
      }
      hyps[s].log_prob += LogSoftmax(row)[static_cast<std::size_t>(best)];
      if (best == kEos) {
        results[s].ids.assign(hyps[s].tokens.begin() + 1, hyps[s].tokens.end());
        results[s].log_prob = hyps[s].log_prob;
        hyps[s] = Hypothesis();
      } else {
        hyps[s].tokens.push_back(static_cast<TokenId>(best));
        still.push_back(s);
      }
    }
    active = std::move(still);
  }
  for (std::size_t s : active) {
    results[s].ids.assign(hyps[s].tokens.begin() + 1, hyps[s].tokens.end());
    results[s].log_prob = hyps[s].log_prob;
    results[s].truncated = true;
  }
  if (steps <= 0) {
    for (auto& r : results) r.truncated = true;
  }
  return results;
}

template <typename T>
std::vector<DecodeResult> Transformer<T>::DecodeGreedy(const std::vector<TokenIds>& sources,
                                                       TokenId task, int max_steps) const {
  if (sources.empty()) return {};
  return Greedy(Encode(sources), task, max_steps);
}

template <typename T>
std::vector<DecodeResult> Transformer<T>::DecodeBeam(const std::vector<TokenIds>& sources,
                                                     TokenId task, int beam_width,
                                                     int max_steps) const {
  if (beam_width < 1) {
    throw ModelError(ModelError::Kind::kBadConfig, "beam width must be at least 1");
  }
  if (sources.empty()) return {};
  const Memory memory = Encode(sources);
  const std::vector<DecodeResult> greedy = Greedy(memory, task, max_steps);
  const std::size_t n = sources.size();
  const auto width = static_cast<std::size_t>(beam_width);

  struct Beam {
    std::vector<Hypothesis> alive;
    std::vector<DecodeResult> finished;
    bool done = false;
  };
  std::vector<Beam> beams(n);
  for (std::size_t s = 0; s < n; ++s) {
    Hypothesis h;
    h.source = static_cast<int>(s);
    h.tokens = {task};
    h.k.assign(layout_->dec.size(), MatT<T>(0, config_.d_model));
    h.v.assign(layout_->dec.size(), MatT<T>(0, config_.d_model));
    beams[s].alive.push_back(std::move(h));
  }

  struct Candidate {
    double score;
    std::size_t parent;
    TokenId token;
  };
  const int steps = std::min(max_steps, config_.max_len);
  for (int step = 0; step < steps; ++step) {
    std::vector<Hypothesis*> ptrs;
    for (auto& b : beams) {
      if (b.done) continue;
      for (auto& h : b.alive) ptrs.push_back(&h);
    }
    if (ptrs.empty()) break;
    MatT<T> logits = Step(memory, ptrs);
    Eigen::Index row = 0;
    for (auto& b : beams) {
      if (b.done) continue;
      std::vector<Candidate> cands;
      for (std::size_t j = 0; j < b.alive.size(); ++j, ++row) {
        std::vector<double> lp = LogSoftmax(logits.row(row));
        std::vector<TokenId> order(lp.size());
        std::iota(order.begin(), order.end(), 0);
        const std::size_t keep = std::min(width, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(),
                          [&](TokenId a, TokenId c) {
                            return lp[static_cast<std::size_t>(a)] > lp[static_cast<std::size_t>(c)] ||
                                   (lp[static_cast<std::size_t>(a)] == lp[static_cast<std::size_t>(c)] && a < c);
                          });
        for (std::size_t r = 0; r < keep; ++r) {
          cands.push_back({b.alive[j].log_prob + lp[static_cast<std::size_t>(order[r])], j, order[r]});
        }
      }
      std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& c) {
        return a.score > c.score;
      });
      std::vector<Hypothesis> next;
      for (const auto& cand : cands) {
        if (next.size() >= width) break;
        const Hypothesis& parent = b.alive[cand.parent];
        if (cand.token == kEos) {
          if (b.finished.size() < width) {
            DecodeResult r;
            r.ids.assign(parent.tokens.begin() + 1, parent.tokens.end());
            r.log_prob = cand.score;
            b.finished.push_back(std::move(r));
          }
          continue;
        }
        Hypothesis child = parent;
        child.tokens.push_back(cand.token);
        child.log_prob = cand.score;
        next.push_back(std::move(child));
      }
      b.alive = std::move(next);
      if (b.finished.size() >= width || b.alive.empty()) b.done = true;
    }
  }

  std::vector<DecodeResult> results(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<DecodeResult> pool = std::move(beams[s].finished);
    if (pool.empty()) {
      for (const auto& h : beams[s].alive) {
        DecodeResult r;
        r.ids.assign(h.tokens.begin() + 1, h.tokens.end());
        r.log_prob = h.log_prob;
        r.truncated = true;
        pool.push_back(std::move(r));
      }
    }
    pool.push_back(greedy[s]);
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].score() > pool[best].score()) best = i;
    }
    results[s] = pool[best];
  }
  return results;
}

template <typename T>
LossBreakdown ComputeLoss(const std::vector<typename Transformer<T>::Mat>& logits_amr,
                          const std::vector<TokenIds>& gold_amr,
                          const std::vector<typename Transformer<T>::Mat>& logits_eng,
                          const std::vector<TokenIds>& gold_eng, const ModelConfig& config) {
  auto task = [&](const std::vector<typename Transformer<T>::Mat>& logits,
                  const std::vector<TokenIds>& gold, long& count) {
    if (logits.size() != gold.size()) throw Shape("loss: logits and gold batch sizes differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (static_cast<std::size_t>(logits[i].rows()) < gold[i].size()) {
        throw Shape("loss: fewer logit rows than gold positions");
      }
      for (std::size_t t = 0; t < gold[i].size(); ++t) {
        const TokenId target = gold[i][t];
        if (target == kPad) continue;
        if (target < 0 || target >= logits[i].cols()) throw Shape("loss: gold id outside vocabulary");
        sum += TokenLoss(logits[i].row(static_cast<Eigen::Index>(t)), target,
                         config.label_smoothing);
        ++count;
      }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
  };
  LossBreakdown out;
  out.loss_amr = task(logits_amr, gold_amr, out.tokens_amr);
  out.loss_eng = task(logits_eng, gold_eng, out.tokens_eng);
  out.total = config.loss_weight_amr * out.loss_amr + config.loss_weight_eng * out.loss_eng;
  return out;
}

template class ParamSet<float>;
template class ParamSet<double>;
template class Transformer<float>;
template class Transformer<double>;
template LossBreakdown ComputeLoss<float>(const std::vector<Transformer<float>::Mat>&,
                                          const std::vector<TokenIds>&,
                                          const std::vector<Transformer<float>::Mat>&,
                                          const std::vector<TokenIds>&, const ModelConfig&);
template LossBreakdown ComputeLoss<double>(const std::vector<Transformer<double>::Mat>&,
                                           const std::vector<TokenIds>&,
                                           const std::vector<Transformer<double>::Mat>&,
                                           const std::vector<TokenIds>&, const ModelConfig&);

}  // namespace xlamr
