#include "convcaps/caps/routing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "convcaps/errors.hpp"

namespace convcaps::caps {

Tensor routing_softmax(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("routing softmax expects [children x classes]");
  const std::size_t rows = logits.dim(0), n = logits.dim(1);
  Tensor out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* t = logits.data() + r * n;
    double* l = out.data() + r * n;
    const double peak = *std::max_element(t, t + n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += (l[k] = std::exp(t[k] - peak));
    for (std::size_t k = 0; k < n; ++k) l[k] /= total;
  }
  return out;
}

Tensor class_predictions(const CapsuleTensor& children, const ClassCapsParams& p) {
  const auto& w = p.weights.shape();
  if (w.size() != 5 || w[0] != children.arrays || w[1] != children.positions || w[4] != children.dim) {
    throw ShapeError("class caps: viewpoint matrices " + numerics::shape_string(w) + " do not match children");
  }
  const std::size_t a3 = w[0], c3 = w[1], n = w[2], d4 = w[3], d3 = w[4];
  Tensor uhat({a3, c3, n, d4});
  const double* wm = p.weights.data();
  double* out = uhat.data();
  for (std::size_t i = 0; i < a3; ++i) {
    for (std::size_t j = 0; j < c3; ++j) {
      const auto u = children.capsule(j, i);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t r = 0; r < d4; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < d3; ++c) acc += wm[r * d3 + c] * u[c];
          out[r] = acc;
        }
        wm += d4 * d3;
        out += d4;
      }
    }
  }
  return uhat;
}

void class_predictions_backward(const CapsuleTensor& children, const ClassCapsParams& p,
                                const Tensor& predictions_grad, ClassCapsParams& grad,
                                CapsuleTensor* children_grad) {
  const auto& w = p.weights.shape();
  const std::size_t a3 = w[0], c3 = w[1], n = w[2], d4 = w[3], d3 = w[4];
  if (predictions_grad.size() != a3 * c3 * n * d4) throw ShapeError("class caps backward: gradient shape");
  const double* wm = p.weights.data();
  double* gw = grad.weights.data();
  const double* g = predictions_grad.data();
  for (std::size_t i = 0; i < a3; ++i) {
    for (std::size_t j = 0; j < c3; ++j) {
      const auto u = children.capsule(j, i);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t r = 0; r < d4; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          for (std::size_t c = 0; c < d3; ++c) gw[r * d3 + c] += gr * u[c];
          if (children_grad) {
            auto du = children_grad->capsule(j, i);
            for (std::size_t c = 0; c < d3; ++c) du[c] += gr * wm[r * d3 + c];
          }
        }
        wm += d4 * d3;
        gw += d4 * d3;
        g += d4;
      }
    }
  }
}

namespace {

struct PredictionShape {
  std::size_t children, classes, dim;
};

PredictionShape prediction_shape(const Tensor& predictions) {
  if (predictions.rank() != 4) throw ShapeError("predictions must be [a3 x c3 x n x d4]");
  return {predictions.dim(0) * predictions.dim(1), predictions.dim(2), predictions.dim(3)};
}

}  // namespace

Tensor route(const Tensor& predictions, std::size_t iterations, RoutingTrace* trace, RoutingState* state) {
  if (iterations == 0) throw std::invalid_argument("routing needs at least one iteration");
  const auto [children, n, d4] = prediction_shape(predictions);
  const double* uhat = predictions.data();

  Tensor logits({children, n});
  Tensor coupling;
  Tensor v({n, d4});
  if (trace) *trace = RoutingTrace{};
  for (std::size_t it = 0; it < iterations; ++it) {
    coupling = routing_softmax(logits);
    Tensor s({n, d4});
    for (std::size_t ch = 0; ch < children; ++ch) {
      for (std::size_t k = 0; k < n; ++k) {
        const double l = coupling[ch * n + k];
        const double* u = uhat + (ch * n + k) * d4;
        double* sk = s.data() + k * d4;
        for (std::size_t e = 0; e < d4; ++e) sk[e] += l * u[e];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      squash(s.values().subspan(k * d4, d4), v.values().subspan(k * d4, d4));
    }
    if (trace) {
      trace->coupling.push_back(coupling);
      trace->logits.push_back(logits);
      trace->parents.push_back(s);
      trace->outputs.push_back(v);
    }
    if (it + 1 == iterations) break;
    for (std::size_t ch = 0; ch < children; ++ch) {
      for (std::size_t k = 0; k < n; ++k) {
        logits[ch * n + k] +=
            dot(std::span<const double>(uhat + (ch * n + k) * d4, d4), v.values().subspan(k * d4, d4));
      }
    }
  }
  if (state) {
    state->logits = std::move(logits);
    state->coupling = std::move(coupling);
    state->iterations = iterations;
  }
  return v;
}

Tensor route_backward(const Tensor& predictions, const RoutingTrace& trace, const Tensor& activations_grad) {
  const auto [children, n, d4] = prediction_shape(predictions);
  const std::size_t iterations = trace.outputs.size();
  if (iterations == 0 || activations_grad.size() != n * d4) throw ShapeError("route_backward: bad trace or gradient");
  const double* uhat = predictions.data();

  Tensor grad_uhat(predictions.shape());
  // dL/dt of the logits entering the iteration after the one being processed.
  Tensor grad_logits({children, n});
  Tensor grad_v({n, d4});
  Tensor grad_s({n, d4});
  std::vector<double> grad_coupling(n);

  for (std::size_t step = iterations; step-- > 0;) {
    const Tensor& l = trace.coupling[step];
    const Tensor& s = trace.parents[step];
    const Tensor& v = trace.outputs[step];
    const bool last = step + 1 == iterations;

    if (last) {
      grad_v = activations_grad;
    } else {
      // t' = t + <u_hat, v>
      grad_v.fill(0.0);
      for (std::size_t ch = 0; ch < children; ++ch) {
        for (std::size_t k = 0; k < n; ++k) {
          const double gt = grad_logits[ch * n + k];
          if (gt == 0.0) continue;
          const double* u = uhat + (ch * n + k) * d4;
          double* gu = grad_uhat.data() + (ch * n + k) * d4;
          for (std::size_t e = 0; e < d4; ++e) {
            grad_v[k * d4 + e] += gt * u[e];
            gu[e] += gt * v[k * d4 + e];
          }
        }
      }
    }

    grad_s.fill(0.0);
    for (std::size_t k = 0; k < n; ++k) {
      squash_backward(s.values().subspan(k * d4, d4), grad_v.values().subspan(k * d4, d4),
                      grad_s.values().subspan(k * d4, d4));
    }

    // s_k = sum_ch l[ch,k] u_hat[ch,k], then l = softmax(t).
    for (std::size_t ch = 0; ch < children; ++ch) {
      double weighted = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double* u = uhat + (ch * n + k) * d4;
        double* gu = grad_uhat.data() + (ch * n + k) * d4;
        const double lk = l[ch * n + k];
        const double* gs = grad_s.data() + k * d4;
        double gl = 0.0;
        for (std::size_t e = 0; e < d4; ++e) {
          gl += gs[e] * u[e];
          gu[e] += lk * gs[e];
        }
        grad_coupling[k] = gl;
        weighted += lk * gl;
      }
      for (std::size_t k = 0; k < n; ++k) {
        grad_logits[ch * n + k] += l[ch * n + k] * (grad_coupling[k] - weighted);
      }
    }
  }
  return grad_uhat;
}

RoutingResult dynamic_routing(const CapsuleTensor& children, const ClassCapsParams& p, std::size_t iterations) {
  RoutingResult result;
  result.activations = route(class_predictions(children, p), iterations, nullptr, &result.state);
  return result;
}

}  // namespace convcaps::caps
