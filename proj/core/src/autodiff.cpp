#include "esseg/autodiff.hpp"

#include <cmath>
#include <string>

#include "esseg/errors.hpp"

namespace esseg {

namespace {

void check_id(int id, int count, const char* who) {
    if (id < 0 || id >= count)
        throw param_error(std::string(who) + ": bad node id " + std::to_string(id));
}

} // namespace

int Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Graph::leaf(const Tensor& t) {
    require_valid_shape(t.channels, t.width, t.height, "leaf");
    Node n;
    n.op = Op::leaf;
    n.value = t;
    return push(std::move(n));
}

int Graph::linear(int x, int matrix) {
    check_id(x, node_count(), "linear");
    check_id(matrix, node_count(), "linear");
    const Tensor& xv = in_value(x);
    const Tensor& w = in_value(matrix);
    if (w.height != 1 || w.width != xv.channels)
        throw shape_error("linear: matrix is " + std::to_string(w.channels) + "x" +
                          std::to_string(w.width) + ", input has " +
                          std::to_string(xv.channels) + " channels");
    Node n;
    n.op = Op::linear;
    n.in0 = x;
    n.in1 = matrix;
    n.value = Tensor(w.channels, xv.width, xv.height);
    const std::size_t np = xv.pixels();
    for (int r = 0; r < w.channels; ++r) {
        double* out = n.value.channel(r);
        for (int c = 0; c < xv.channels; ++c) {
            const double coef = w.at(r, 0, c);
            if (coef == 0.0) continue;
            const double* src = xv.channel(c);
            for (std::size_t p = 0; p < np; ++p) out[p] += coef * src[p];
        }
    }
    return push(std::move(n));
}

int Graph::bilinear_upsample(int x, int out_w, int out_h) {
    check_id(x, node_count(), "bilinear_upsample");
    const Tensor& xv = in_value(x);
    if (out_w < xv.width || out_h < xv.height)
        throw shape_error("bilinear_upsample: target " + std::to_string(out_w) + "x" +
                          std::to_string(out_h) + " is smaller than source " +
                          std::to_string(xv.width) + "x" + std::to_string(xv.height));
    Node n;
    n.op = Op::upsample;
    n.in0 = x;
    n.i0 = out_w;
    n.i1 = out_h;
    n.value = Tensor(xv.channels, out_w, out_h);
    const double fx = out_w > 1 ? double(xv.width - 1) / double(out_w - 1) : 0.0;
    const double fy = out_h > 1 ? double(xv.height - 1) / double(out_h - 1) : 0.0;
    for (int c = 0; c < xv.channels; ++c) {
        const double* src = xv.channel(c);
        double* dst = n.value.channel(c);
        for (int oy = 0; oy < out_h; ++oy) {
            const double sy = oy * fy;
            const int y0 = static_cast<int>(sy);
            const int y1 = y0 + 1 < xv.height ? y0 + 1 : y0;
            const double wy = sy - y0;
            for (int ox = 0; ox < out_w; ++ox) {
                const double sx = ox * fx;
                const int x0 = static_cast<int>(sx);
                const int x1 = x0 + 1 < xv.width ? x0 + 1 : x0;
                const double wx = sx - x0;
                const double top = (1.0 - wx) * src[std::size_t(y0) * xv.width + x0] +
                                   wx * src[std::size_t(y0) * xv.width + x1];
                const double bot = (1.0 - wx) * src[std::size_t(y1) * xv.width + x0] +
                                   wx * src[std::size_t(y1) * xv.width + x1];
                dst[std::size_t(oy) * out_w + ox] = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return push(std::move(n));
}

int Graph::relu(int x) {
    check_id(x, node_count(), "relu");
    Node n;
    n.op = Op::relu;
    n.in0 = x;
    n.value = in_value(x);
    for (double& v : n.value.data)
        if (v < 0.0) v = 0.0;
    return push(std::move(n));
}

int Graph::sigmoid(int x) {
    check_id(x, node_count(), "sigmoid");
    Node n;
    n.op = Op::sigmoid;
    n.in0 = x;
    n.value = in_value(x);
    for (double& v : n.value.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(n));
}

int Graph::channel_norm(int x, int gamma, int beta) {
    check_id(x, node_count(), "channel_norm");
    check_id(gamma, node_count(), "channel_norm");
    check_id(beta, node_count(), "channel_norm");
    const Tensor& xv = in_value(x);
    const Tensor& g = in_value(gamma);
    const Tensor& b = in_value(beta);
    if (g.channels != xv.channels || g.width != 1 || g.height != 1 ||
        b.channels != xv.channels || b.width != 1 || b.height != 1)
        throw shape_error("channel_norm: gamma/beta must be (channels,1,1)");
    const std::size_t np = xv.pixels();
    if (np < 2)
        throw numeric_error("channel_norm: variance over a single pixel is degenerate");
    Node n;
    n.op = Op::channel_norm;
    n.in0 = x;
    n.in1 = gamma;
    n.in2 = beta;
    n.value = Tensor(xv.channels, xv.width, xv.height);
    n.saved.resize(xv.size());         // normalized values
    n.aux.resize(xv.channels);         // reciprocal standard deviations
    for (int c = 0; c < xv.channels; ++c) {
        const double* src = xv.channel(c);
        double mean = 0.0;
        for (std::size_t p = 0; p < np; ++p) mean += src[p];
        mean /= double(np);
        double var = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            const double d = src[p] - mean;
            var += d * d;
        }
        var /= double(np);
        const double istd = 1.0 / std::sqrt(var + norm_epsilon);
        n.aux[c] = istd;
        const double gain = g.at(c, 0, 0), shift = b.at(c, 0, 0);
        double* hat = n.saved.data() + n.value.plane(c);
        double* out = n.value.channel(c);
        for (std::size_t p = 0; p < np; ++p) {
            const double h = (src[p] - mean) * istd;
            hat[p] = h;
            out[p] = gain * h + shift;
        }
    }
    return push(std::move(n));
}

int Graph::channel_dropout(int x, double p, Rng& rng, bool enabled) {
    check_id(x, node_count(), "channel_dropout");
    if (p < 0.0 || p >= 1.0)
        throw param_error("channel_dropout: p must be in [0,1), got " + std::to_string(p));
    const Tensor& xv = in_value(x);
    Node n;
    n.op = Op::dropout;
    n.in0 = x;
    n.aux.assign(xv.channels, 1.0);
    if (enabled) {
        const double keep_scale = 1.0 / (1.0 - p);
        for (int c = 0; c < xv.channels; ++c) n.aux[c] = rng.bernoulli(p) ? 0.0 : keep_scale;
    }
    n.value = Tensor(xv.channels, xv.width, xv.height);
    const std::size_t np = xv.pixels();
    for (int c = 0; c < xv.channels; ++c) {
        const double m = n.aux[c];
        const double* src = xv.channel(c);
        double* dst = n.value.channel(c);
        if (m != 0.0)
            for (std::size_t p2 = 0; p2 < np; ++p2) dst[p2] = m * src[p2];
    }
    return push(std::move(n));
}

int Graph::mse_channels(int x, const Tensor& target, int c_begin, int c_end) {
    check_id(x, node_count(), "mse_channels");
    const Tensor& xv = in_value(x);
    if (!xv.same_shape(target))
        throw shape_error("mse_channels: prediction and target shapes differ");
    if (c_begin < 0 || c_end > xv.channels || c_begin >= c_end)
        throw param_error("mse_channels: bad channel range [" + std::to_string(c_begin) +
                          ", " + std::to_string(c_end) + ")");
    Node n;
    n.op = Op::mse;
    n.in0 = x;
    n.target = &target;
    n.i0 = c_begin;
    n.i1 = c_end;
    const std::size_t np = xv.pixels();
    double acc = 0.0;
    for (int c = c_begin; c < c_end; ++c) {
        const double* a = xv.channel(c);
        const double* b = target.channel(c);
        for (std::size_t p = 0; p < np; ++p) {
            const double d = a[p] - b[p];
            acc += d * d;
        }
    }
    n.value = Tensor(1, 1, 1, acc / double(np));
    return push(std::move(n));
}

int Graph::weighted_sum(double a, int x, double b, int y) {
    check_id(x, node_count(), "weighted_sum");
    check_id(y, node_count(), "weighted_sum");
    const Tensor& xv = in_value(x);
    const Tensor& yv = in_value(y);
    if (!xv.same_shape(yv)) throw shape_error("weighted_sum: shapes differ");
    Node n;
    n.op = Op::weighted_sum;
    n.in0 = x;
    n.in1 = y;
    n.s0 = a;
    n.s1 = b;
    n.value = Tensor(xv.channels, xv.width, xv.height);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value.data[i] = a * xv.data[i] + b * yv.data[i];
    return push(std::move(n));
}

void Graph::backward(int root) {
    check_id(root, node_count(), "backward");
    if (nodes_[root].value.size() != 1)
        throw shape_error("backward: root must be a scalar node");
    for (int i = 0; i <= root; ++i) {
        Node& n = nodes_[i];
        n.grad = Tensor(n.value.channels, n.value.width, n.value.height);
    }
    nodes_[root].grad.data[0] = 1.0;

    for (int i = root; i >= 0; --i) {
        Node& n = nodes_[i];
        switch (n.op) {
        case Op::leaf:
            break;
        case Op::linear: {
            const Tensor& xv = nodes_[n.in0].value;
            const Tensor& w = nodes_[n.in1].value;
            Tensor& dx = nodes_[n.in0].grad;
            Tensor& dw = nodes_[n.in1].grad;
            const std::size_t np = xv.pixels();
            for (int r = 0; r < w.channels; ++r) {
                const double* g = n.grad.channel(r);
                for (int c = 0; c < xv.channels; ++c) {
                    const double coef = w.at(r, 0, c);
                    const double* src = xv.channel(c);
                    double* dxc = dx.channel(c);
                    double acc = 0.0;
                    for (std::size_t p = 0; p < np; ++p) {
                        acc += g[p] * src[p];
                        dxc[p] += coef * g[p];
                    }
                    dw.at(r, 0, c) += acc;
                }
            }
            break;
        }
        case Op::upsample: {
            const Tensor& xv = nodes_[n.in0].value;
            Tensor& dx = nodes_[n.in0].grad;
            const int out_w = n.i0, out_h = n.i1;
            const double fx = out_w > 1 ? double(xv.width - 1) / double(out_w - 1) : 0.0;
            const double fy = out_h > 1 ? double(xv.height - 1) / double(out_h - 1) : 0.0;
            for (int c = 0; c < xv.channels; ++c) {
                const double* g = n.grad.channel(c);
                double* d = dx.channel(c);
                for (int oy = 0; oy < out_h; ++oy) {
                    const double sy = oy * fy;
                    const int y0 = static_cast<int>(sy);
                    const int y1 = y0 + 1 < xv.height ? y0 + 1 : y0;
                    const double wy = sy - y0;
                    for (int ox = 0; ox < out_w; ++ox) {
                        const double sx = ox * fx;
                        const int x0 = static_cast<int>(sx);
                        const int x1 = x0 + 1 < xv.width ? x0 + 1 : x0;
                        const double wx = sx - x0;
                        const double gv = g[std::size_t(oy) * out_w + ox];
                        d[std::size_t(y0) * xv.width + x0] += (1.0 - wy) * (1.0 - wx) * gv;
                        d[std::size_t(y0) * xv.width + x1] += (1.0 - wy) * wx * gv;
                        d[std::size_t(y1) * xv.width + x0] += wy * (1.0 - wx) * gv;
                        d[std::size_t(y1) * xv.width + x1] += wy * wx * gv;
                    }
                }
            }
            break;
        }
        case Op::relu: {
            const Tensor& xv = nodes_[n.in0].value;
            Tensor& dx = nodes_[n.in0].grad;
            for (std::size_t p = 0; p < xv.size(); ++p)
                if (xv.data[p] > 0.0) dx.data[p] += n.grad.data[p];
            break;
        }
        case Op::sigmoid: {
            Tensor& dx = nodes_[n.in0].grad;
            for (std::size_t p = 0; p < n.value.size(); ++p) {
                const double s = n.value.data[p];
                dx.data[p] += s * (1.0 - s) * n.grad.data[p];
            }
            break;
        }
        case Op::channel_norm: {
            const Tensor& xv = nodes_[n.in0].value;
            const Tensor& g = nodes_[n.in1].value;
            Tensor& dx = nodes_[n.in0].grad;
            Tensor& dgamma = nodes_[n.in1].grad;
            Tensor& dbeta = nodes_[n.in2].grad;
            const std::size_t np = xv.pixels();
            for (int c = 0; c < xv.channels; ++c) {
                const double* gy = n.grad.channel(c);
                const double* hat = n.saved.data() + n.value.plane(c);
                double sum_g = 0.0, sum_gh = 0.0;
                for (std::size_t p = 0; p < np; ++p) {
                    sum_g += gy[p];
                    sum_gh += gy[p] * hat[p];
                }
                dgamma.at(c, 0, 0) += sum_gh;
                dbeta.at(c, 0, 0) += sum_g;
                const double scale = g.at(c, 0, 0) * n.aux[c];
                const double mg = sum_g / double(np);
                const double mgh = sum_gh / double(np);
                double* d = dx.channel(c);
                for (std::size_t p = 0; p < np; ++p)
                    d[p] += scale * (gy[p] - mg - hat[p] * mgh);
            }
            break;
        }
        case Op::dropout: {
            Tensor& dx = nodes_[n.in0].grad;
            const std::size_t np = n.value.pixels();
            for (int c = 0; c < n.value.channels; ++c) {
                const double m = n.aux[c];
                if (m == 0.0) continue;
                const double* gp = n.grad.channel(c);
                double* d = dx.channel(c);
                for (std::size_t p = 0; p < np; ++p) d[p] += m * gp[p];
            }
            break;
        }
        case Op::mse: {
            const Tensor& xv = nodes_[n.in0].value;
            Tensor& dx = nodes_[n.in0].grad;
            const double gscale = 2.0 * n.grad.data[0] / double(xv.pixels());
            const std::size_t np = xv.pixels();
            for (int c = n.i0; c < n.i1; ++c) {
                const double* a = xv.channel(c);
                const double* b = n.target->channel(c);
                double* d = dx.channel(c);
                for (std::size_t p = 0; p < np; ++p) d[p] += gscale * (a[p] - b[p]);
            }
            break;
        }
        case Op::weighted_sum: {
            Tensor& dx = nodes_[n.in0].grad;
            Tensor& dy = nodes_[n.in1].grad;
            for (std::size_t p = 0; p < n.value.size(); ++p) {
                dx.data[p] += n.s0 * n.grad.data[p];
                dy.data[p] += n.s1 * n.grad.data[p];
            }
            break;
        }
        }
    }
}

} // namespace esseg
