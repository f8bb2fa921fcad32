#ifndef ESSEG_AUTODIFF_HPP
#define ESSEG_AUTODIFF_HPP

#include <vector>

#include "esseg/rng.hpp"
#include "esseg/tensor.hpp"

namespace esseg {

// Reverse-mode autodiff over dense tensors. A Graph is built once per
// forward pass; node ids are creation-ordered, which is also a topological
// order, so backward() is a single reverse sweep. Node values are fixed once
// created; only gradient buffers are written afterwards.
class Graph {
public:
    enum class Op {
        leaf,
        linear,        // per-pixel channel mix by a (rows x cols) matrix
        upsample,      // align-corners bilinear, never downsamples
        relu,
        sigmoid,
        channel_norm,  // per-channel standardization with learnable gain/shift
        dropout,       // whole-channel dropout with 1/(1-p) survivor scaling
        mse,           // mean squared error over a channel range, per-pixel normalized
        weighted_sum,  // a*X + b*Y elementwise
    };

    struct Node {
        Op op;
        int in0 = -1, in1 = -1, in2 = -1;
        Tensor value;
        Tensor grad;               // allocated by backward()
        std::vector<double> saved; // bulk op state (normalized values)
        std::vector<double> aux;   // small op state (per-channel factors)
        const Tensor* target = nullptr; // mse only; borrowed, caller keeps alive
        int i0 = 0, i1 = 0;
        double s0 = 0.0, s1 = 0.0;
    };

    int leaf(const Tensor& t);

    // out[r] = sum_c matrix[r,c] * x[c] at every pixel. matrix has shape
    // (rows, cols, 1) with cols == x.channels.
    int linear(int x, int matrix);

    // Align-corners bilinear interpolation to (out_w, out_h). Source
    // coordinate for output X is X*(in_w-1)/(out_w-1); a 1-wide axis maps to
    // coordinate 0. Shrinking an axis is a shape error.
    int bilinear_upsample(int x, int out_w, int out_h);

    int relu(int x);    // subgradient at 0 is 0
    int sigmoid(int x);

    // Per channel: standardize over all pixels (population variance,
    // epsilon 1e-5), then scale by gamma and shift by beta. gamma and beta
    // have shape (channels, 1, 1). A 1-pixel channel has no usable variance
    // and is a numeric error.
    int channel_norm(int x, int gamma, int beta);

    // Zero each channel independently with probability p and scale survivors
    // by 1/(1-p). Draws channels in index order. When disabled the node is an
    // identity and the rng is not consumed.
    int channel_dropout(int x, double p, Rng& rng, bool enabled);

    // (1/(w*h)) * sum over channels [c_begin, c_end) of squared error against
    // target. Target is borrowed, not copied, and receives no gradient.
    int mse_channels(int x, const Tensor& target, int c_begin, int c_end);

    int weighted_sum(double a, int x, double b, int y);

    // Accumulate gradients of `root` (a scalar node) into every node at or
    // below it. Gradients are zeroed first; call once per graph.
    void backward(int root);

    const Tensor& value(int id) const { return nodes_[id].value; }
    const Tensor& grad(int id) const { return nodes_[id].grad; }
    Tensor& mutable_value(int id) { return nodes_[id].value; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    static constexpr double norm_epsilon = 1e-5;

private:
    int push(Node n);
    const Tensor& in_value(int id) const { return nodes_[id].value; }

    std::vector<Node> nodes_;
};

} // namespace esseg

#endif
