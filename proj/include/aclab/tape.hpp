#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "aclab/tensor.hpp"

namespace aclab {

// Reverse-mode autodiff over a fixed primitive set: conv2d (stride 1, zero
// padding), dense affine map, relu, 2x2 max-pool, elementwise add, scalar
// scale, softmax-with-cross-entropy and logit selection. Records a node per
// primitive; backward replays the tape in exact reverse order, so gradients
// are deterministic for a given tape.
//
// A Tape is single-context during recording. Tensors handed out by value()
// stay valid for the tape's lifetime.
class Tape {
  public:
    using NodeId = int;

    // Registers an input tensor. Differentiable leaves are the targets
    // reported by backward().
    NodeId leaf(Tensor value, bool differentiable = false);

    // 2-D convolution, stride 1, zero padding preserving spatial size.
    // input (c,h,w), weight (oc,c,k,k) with odd k, bias (oc).
    NodeId conv2d(NodeId input, NodeId weight, NodeId bias);

    // Affine map over the flattened input: weight (out,in), bias (out).
    NodeId dense(NodeId input, NodeId weight, NodeId bias);

    NodeId relu(NodeId input);

    // 2x2 max-pool with stride 2 on (c,h,w); trailing odd row/col dropped.
    // Ties route the gradient to the first maximal element in row-major
    // order.
    NodeId maxPool2(NodeId input);

    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId input, double factor);

    // Scalar loss -log softmax(logits)[label].
    NodeId softmaxCrossEntropy(NodeId logits, int label);

    // Scalar logits[classIndex].
    NodeId selectLogit(NodeId logits, int classIndex);

    const Tensor& value(NodeId id) const;
    size_t nodeCount() const { return nodes_.size(); }

    struct Gradients {
        // (leaf id, gradient) in leaf registration order.
        std::vector<std::pair<NodeId, Tensor>> byLeaf;
        const Tensor& at(NodeId id) const;
    };

    // d(outputScalar)/d(leaf) for every differentiable leaf, each gradient
    // shaped like its leaf. outputScalar must be scalar-valued.
    Gradients backward(NodeId outputScalar) const;

  private:
    enum class Op : uint8_t {
        Leaf,
        Conv2d,
        Dense,
        Relu,
        MaxPool2,
        Add,
        Scale,
        SoftmaxCrossEntropy,
        SelectLogit,
    };

    struct Node {
        Op op;
        int parents[3] = {-1, -1, -1};
        Tensor value;
        double factor = 0.0;          // Scale
        int index = -1;               // SelectLogit class / CE label
        std::vector<size_t> argmax;   // MaxPool2 routing, flat input indices
        Tensor cached;                // CE softmax probabilities
    };

    NodeId push(Node node);
    const Tensor& val(NodeId id) const { return nodes_[id].value; }
    void checkNode(NodeId id, const char* prim) const;

    std::vector<Node> nodes_;
    std::vector<NodeId> leafMarkers_;
};

}  // namespace aclab
