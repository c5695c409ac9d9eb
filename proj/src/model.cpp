#include "fltp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fltp/error.hpp"
#include "fltp/objective.hpp"
#include "fltp/rng.hpp"

namespace fltp {

void ModelDims::validate() const {
  if (t_obs < 2) throw ValidationError("t_obs must be >= 2");
  if (t_pre < 1) throw ValidationError("t_pre must be >= 1");
  if (modes < 1) throw ValidationError("modes must be >= 1");
  if (hidden < 1) throw ValidationError("hidden must be >= 1");
}

ParamLayout::ParamLayout(const ModelDims& d) {
  const std::size_t din = d.input_dim();
  const std::size_t h = d.hidden;
  const std::size_t head = d.head_dim();
  const std::size_t f = d.modes;

  w1 = 0;
  b1 = w1 + h * din;
  w2 = b1 + h;
  b2 = w2 + h * h;
  w_loc = b2 + h;
  b_loc = w_loc + head * 2 * h;
  w_b = b_loc + head;
  b_b = w_b + head * 2 * h;
  w_m = b_b + head;
  b_m = w_m + f * 2 * h;
  total = b_m + f;
}

std::size_t ModelDims::param_count() const { return ParamLayout(*this).total; }

ParamVector init_params(std::uint64_t seed, const ModelDims& dims) {
  dims.validate();
  const ParamLayout layout(dims);
  ParamVector params{dims, std::vector<double>(layout.total, 0.0)};

  Rng rng(seed);
  auto fill = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
    const double s = std::sqrt(6.0 / static_cast<double>(cols + rows));
    for (std::size_t k = 0; k < rows * cols; ++k) {
      params.values[offset + k] = rng.uniform(-s, s);
    }
  };
  const std::size_t h = dims.hidden;
  fill(layout.w1, h, dims.input_dim());
  fill(layout.w2, h, h);
  fill(layout.w_loc, dims.head_dim(), 2 * h);
  fill(layout.w_b, dims.head_dim(), 2 * h);
  fill(layout.w_m, dims.modes, 2 * h);
  // biases stay zero
  return params;
}

PredictionOutput::PredictionOutput(const ModelDims& d, std::size_t agents)
    : dims(d),
      num_agents(agents),
      mu(agents * d.modes * d.t_pre * 2, 0.0),
      scale(agents * d.modes * d.t_pre * 2, 0.0),
      mode_probs(agents * d.modes, 0.0),
      centers(agents) {}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// y = W x + b, W row-major (rows x cols).
void affine(const double* w, const double* b, const double* x, double* y, std::size_t rows,
            std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

// gw += g (outer) x and gb += g, over rows [r0, r1).
void add_outer(double* gw, double* gb, const double* g, const double* x, std::size_t r0,
               std::size_t r1, std::size_t cols) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* gwr = gw + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gwr[c] += gr * x[c];
    gb[r] += gr;
  }
}

// gx += W^T g, over rows [r0, r1).
void add_transposed(const double* w, const double* g, double* gx, std::size_t r0, std::size_t r1,
                    std::size_t cols) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gx[c] += gr * wr[c];
  }
}

// Everything the backward pass needs from the forward pass.
struct ForwardTrace {
  std::size_t m = 0;
  std::vector<double> u;     // [agent][D_in]
  std::vector<double> h1;    // [agent][H]
  std::vector<double> e;     // [agent][H]
  std::vector<double> ctx;   // [H], mean of e over agents
  std::vector<double> braw;  // [agent][head], pre-softplus scales
};

PredictionOutput run_forward(const ParamVector& params, const Scenario& scenario,
                             ForwardTrace* trace) {
  const ModelDims& dims = params.dims;
  const ParamLayout layout(dims);
  if (params.values.size() != layout.total) {
    throw ValidationError("parameter vector length " + std::to_string(params.values.size()) +
                          " does not match layout total " + std::to_string(layout.total));
  }
  if (scenario.agents.empty()) throw ValidationError("scenario has no agents");
  for (const AgentTrack& a : scenario.agents) {
    if (a.observed.size() != dims.t_obs || a.future.size() != dims.t_pre) {
      throw ValidationError(
          "scenario track lengths (" + std::to_string(a.observed.size()) + "," +
          std::to_string(a.future.size()) + ") do not match model dims (" +
          std::to_string(dims.t_obs) + "," + std::to_string(dims.t_pre) + ")");
    }
  }

  const std::size_t m = scenario.agents.size();
  const std::size_t din = dims.input_dim();
  const std::size_t h = dims.hidden;
  const std::size_t head = dims.head_dim();
  const std::size_t f_count = dims.modes;
  const double* v = params.values.data();

  PredictionOutput out(dims, m);

  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  tr.m = m;
  tr.u.assign(m * din, 0.0);
  tr.h1.assign(m * h, 0.0);
  tr.e.assign(m * h, 0.0);
  tr.ctx.assign(h, 0.0);
  tr.braw.assign(m * head, 0.0);

  std::vector<double> a_buf(h);
  for (std::size_t i = 0; i < m; ++i) {
    const AgentTrack& track = scenario.agents[i];
    out.centers[i] = track.observed.back();

    double* u = tr.u.data() + i * din;
    for (std::size_t k = 0; k + 1 < dims.t_obs; ++k) {
      const Vec2 d = track.observed[k + 1] - track.observed[k];
      u[2 * k] = d.x;
      u[2 * k + 1] = d.y;
    }

    double* h1 = tr.h1.data() + i * h;
    affine(v + layout.w1, v + layout.b1, u, a_buf.data(), h, din);
    for (std::size_t k = 0; k < h; ++k) h1[k] = std::tanh(a_buf[k]);

    double* e = tr.e.data() + i * h;
    affine(v + layout.w2, v + layout.b2, h1, a_buf.data(), h, h);
    for (std::size_t k = 0; k < h; ++k) e[k] = std::tanh(a_buf[k]);

    for (std::size_t k = 0; k < h; ++k) tr.ctx[k] += e[k];
  }
  for (std::size_t k = 0; k < h; ++k) tr.ctx[k] /= static_cast<double>(m);

  std::vector<double> z(2 * h);
  std::vector<double> head_buf(head);
  std::vector<double> logits(f_count);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(tr.e.data() + i * h, h, z.data());
    std::copy_n(tr.ctx.data(), h, z.data() + h);

    affine(v + layout.w_loc, v + layout.b_loc, z.data(), head_buf.data(), head, 2 * h);
    std::copy_n(head_buf.data(), head, out.mu.data() + i * head);

    double* braw = tr.braw.data() + i * head;
    affine(v + layout.w_b, v + layout.b_b, z.data(), braw, head, 2 * h);
    double* scale = out.scale.data() + i * head;
    for (std::size_t k = 0; k < head; ++k) scale[k] = softplus(braw[k]) + kScaleFloor;

    affine(v + layout.w_m, v + layout.b_m, z.data(), logits.data(), f_count, 2 * h);
    double max_logit = logits[0];
    for (std::size_t f = 1; f < f_count; ++f) max_logit = std::max(max_logit, logits[f]);
    double denom = 0.0;
    double* probs = out.mode_probs.data() + i * f_count;
    for (std::size_t f = 0; f < f_count; ++f) {
      probs[f] = std::exp(logits[f] - max_logit);
      denom += probs[f];
    }
    for (std::size_t f = 0; f < f_count; ++f) probs[f] /= denom;
  }
  return out;
}

// Accumulates the gradient of one scenario's total loss into grad.
double scenario_loss_backward(const ParamVector& params, const Scenario& scenario,
                              std::vector<double>& grad) {
  const ModelDims& dims = params.dims;
  const ParamLayout layout(dims);
  const double* v = params.values.data();
  double* g = grad.data();

  ForwardTrace tr;
  const PredictionOutput out = run_forward(params, scenario, &tr);
  const auto futures = center_futures(scenario, out.centers);
  const auto f_best = best_mode(out, futures);
  const auto targets = soft_targets(out, futures);
  const double l_reg = regression_loss(out, futures, f_best);
  const double l_cls = classification_loss(out, targets);

  const std::size_t m = tr.m;
  const std::size_t din = dims.input_dim();
  const std::size_t h = dims.hidden;
  const std::size_t head = dims.head_dim();
  const std::size_t f_count = dims.modes;
  const std::size_t t_pre = dims.t_pre;
  const double inv_mt = 1.0 / (static_cast<double>(m) * static_cast<double>(t_pre));
  const double inv_m = 1.0 / static_cast<double>(m);

  std::vector<double> g_loc(head), g_braw(head), g_logits(f_count);
  std::vector<double> z(2 * h), g_z(2 * h);
  std::vector<double> g_e_direct(m * h, 0.0), g_ctx(h, 0.0);
  std::vector<double> g_act(h), g_h1(h);

  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(tr.e.data() + i * h, h, z.data());
    std::copy_n(tr.ctx.data(), h, z.data() + h);

    // Regression term: only the winning mode's block carries gradient; the
    // best-mode index itself is a constant of the differentiation.
    std::fill(g_loc.begin(), g_loc.end(), 0.0);
    std::fill(g_braw.begin(), g_braw.end(), 0.0);
    const std::size_t fb = f_best[i];
    const std::size_t block = fb * t_pre * 2;
    for (std::size_t t = 0; t < t_pre; ++t) {
      const double y[2] = {futures[i][t].x, futures[i][t].y};
      for (int d = 0; d < 2; ++d) {
        const std::size_t k = block + 2 * t + d;
        const double mu = out.mu[i * head + k];
        const double b = out.scale[i * head + k];
        const double err = y[d] - mu;
        const double sign = err > 0.0 ? -1.0 : (err < 0.0 ? 1.0 : 0.0);  // d|err|/dmu
        g_loc[k] = inv_mt * sign / b;
        const double g_b = inv_mt * (1.0 / b - std::abs(err) / (b * b));
        g_braw[k] = g_b * sigmoid(tr.braw[i * head + k]);
      }
    }

    // Classification term through the softmax; clamped probabilities pass no
    // gradient, matching the loss exactly.
    const double* probs = out.mode_probs.data() + i * f_count;
    double dot = 0.0;
    for (std::size_t f = 0; f < f_count; ++f) {
      const double gp = probs[f] > kProbFloor ? -inv_m * targets[i * f_count + f] / probs[f] : 0.0;
      g_logits[f] = gp;
      dot += gp * probs[f];
    }
    for (std::size_t f = 0; f < f_count; ++f) g_logits[f] = probs[f] * (g_logits[f] - dot);

    std::fill(g_z.begin(), g_z.end(), 0.0);
    add_outer(g + layout.w_loc, g + layout.b_loc, g_loc.data(), z.data(), block,
              block + 2 * t_pre, 2 * h);
    add_transposed(v + layout.w_loc, g_loc.data(), g_z.data(), block, block + 2 * t_pre, 2 * h);
    add_outer(g + layout.w_b, g + layout.b_b, g_braw.data(), z.data(), block, block + 2 * t_pre,
              2 * h);
    add_transposed(v + layout.w_b, g_braw.data(), g_z.data(), block, block + 2 * t_pre, 2 * h);
    add_outer(g + layout.w_m, g + layout.b_m, g_logits.data(), z.data(), 0, f_count, 2 * h);
    add_transposed(v + layout.w_m, g_logits.data(), g_z.data(), 0, f_count, 2 * h);

    for (std::size_t k = 0; k < h; ++k) {
      g_e_direct[i * h + k] += g_z[k];
      g_ctx[k] += g_z[h + k];
    }
  }

  // The context is a mean, so each agent's embedding receives an equal share.
  for (std::size_t i = 0; i < m; ++i) {
    const double* e = tr.e.data() + i * h;
    const double* h1 = tr.h1.data() + i * h;
    for (std::size_t k = 0; k < h; ++k) {
      const double ge = g_e_direct[i * h + k] + g_ctx[k] * inv_m;
      g_act[k] = ge * (1.0 - e[k] * e[k]);
    }
    add_outer(g + layout.w2, g + layout.b2, g_act.data(), h1, 0, h, h);
    std::fill(g_h1.begin(), g_h1.end(), 0.0);
    add_transposed(v + layout.w2, g_act.data(), g_h1.data(), 0, h, h);
    for (std::size_t k = 0; k < h; ++k) g_act[k] = g_h1[k] * (1.0 - h1[k] * h1[k]);
    add_outer(g + layout.w1, g + layout.b1, g_act.data(), tr.u.data() + i * din, 0, h, din);
  }

  return l_reg + l_cls;
}

}  // namespace

PredictionOutput forward(const ParamVector& params, const Scenario& scenario) {
  return run_forward(params, scenario, nullptr);
}

LossGrad loss_and_grad(const ParamVector& params, std::span<const Scenario* const> batch) {
  if (batch.empty()) throw ValidationError("loss_and_grad: empty batch");
  LossGrad result;
  result.grad.dims = params.dims;
  result.grad.values.assign(params.values.size(), 0.0);

  double loss_sum = 0.0;
  for (const Scenario* s : batch) {
    loss_sum += scenario_loss_backward(params, *s, result.grad.values);
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  result.loss = loss_sum * inv_n;
  for (double& gv : result.grad.values) gv *= inv_n;
  return result;
}

LossGrad loss_and_grad(const ParamVector& params, const std::vector<Scenario>& batch) {
  std::vector<const Scenario*> ptrs;
  ptrs.reserve(batch.size());
  for (const Scenario& s : batch) ptrs.push_back(&s);
  return loss_and_grad(params, std::span<const Scenario* const>(ptrs));
}

}  // namespace fltp
