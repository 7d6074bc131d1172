#include "aclab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aclab {

namespace {

[[noreturn]] void shapeError(const char* prim, const std::string& detail) {
    throw std::invalid_argument(std::string(prim) + ": " + detail);
}

}  // namespace

Tape::NodeId Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::checkNode(NodeId id, const char* prim) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
        shapeError(prim, "node id " + std::to_string(id) + " not on tape");
    }
}

const Tensor& Tape::value(NodeId id) const {
    checkNode(id, "value");
    return nodes_[id].value;
}

Tape::NodeId Tape::leaf(Tensor value, bool differentiable) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    NodeId id = push(std::move(n));
    if (differentiable) leafMarkers_.push_back(id);
    return id;
}

Tape::NodeId Tape::conv2d(NodeId input, NodeId weight, NodeId bias) {
    checkNode(input, "conv2d");
    checkNode(weight, "conv2d");
    checkNode(bias, "conv2d");
    const Tensor& x = val(input);
    const Tensor& w = val(weight);
    const Tensor& b = val(bias);
    if (x.rank() != 3) {
        shapeError("conv2d", "input must be (c,h,w), got " + x.shapeString());
    }
    if (w.rank() != 4) {
        shapeError("conv2d",
                   "weight must be (oc,c,k,k), got " + w.shapeString());
    }
    const size_t c = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
    const size_t oc = w.shape()[0], kc = w.shape()[1];
    const size_t kh = w.shape()[2], kw = w.shape()[3];
    if (kc != c) {
        shapeError("conv2d", "input " + x.shapeString() +
                                 " incompatible with weight " + w.shapeString());
    }
    if (kh % 2 == 0 || kw % 2 == 0 || kh > h || kw > wd) {
        shapeError("conv2d", "kernel " + w.shapeString() +
                                 " unsupported for input " + x.shapeString());
    }
    if (b.rank() != 1 || b.shape()[0] != oc) {
        shapeError("conv2d", "bias " + b.shapeString() +
                                 " does not match weight " + w.shapeString());
    }

    const size_t padH = (kh - 1) / 2, padW = (kw - 1) / 2;
    Tensor out({oc, h, wd});
    for (size_t o = 0; o < oc; ++o) {
        for (size_t oy = 0; oy < h; ++oy) {
            for (size_t ox = 0; ox < wd; ++ox) {
                double s = b[o];
                for (size_t ci = 0; ci < c; ++ci) {
                    for (size_t ky = 0; ky < kh; ++ky) {
                        const long iy = static_cast<long>(oy + ky) -
                                        static_cast<long>(padH);
                        if (iy < 0 || iy >= static_cast<long>(h)) continue;
                        for (size_t kx = 0; kx < kw; ++kx) {
                            const long ix = static_cast<long>(ox + kx) -
                                            static_cast<long>(padW);
                            if (ix < 0 || ix >= static_cast<long>(wd)) continue;
                            s += x[(ci * h + iy) * wd + ix] *
                                 w[((o * c + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(o * h + oy) * wd + ox] = s;
            }
        }
    }

    Node n;
    n.op = Op::Conv2d;
    n.parents[0] = input;
    n.parents[1] = weight;
    n.parents[2] = bias;
    n.value = std::move(out);
    return push(std::move(n));
}

Tape::NodeId Tape::dense(NodeId input, NodeId weight, NodeId bias) {
    checkNode(input, "dense");
    checkNode(weight, "dense");
    checkNode(bias, "dense");
    const Tensor& x = val(input);
    const Tensor& w = val(weight);
    const Tensor& b = val(bias);
    if (w.rank() != 2) {
        shapeError("dense", "weight must be (out,in), got " + w.shapeString());
    }
    const size_t out = w.shape()[0], in = w.shape()[1];
    if (x.size() != in) {
        shapeError("dense", "input " + x.shapeString() +
                                " incompatible with weight " + w.shapeString());
    }
    if (b.rank() != 1 || b.shape()[0] != out) {
        shapeError("dense", "bias " + b.shapeString() +
                                " does not match weight " + w.shapeString());
    }
    Tensor y({out});
    for (size_t o = 0; o < out; ++o) {
        double s = b[o];
        const double* row = w.data() + o * in;
        for (size_t i = 0; i < in; ++i) s += row[i] * x[i];
        y[o] = s;
    }
    Node n;
    n.op = Op::Dense;
    n.parents[0] = input;
    n.parents[1] = weight;
    n.parents[2] = bias;
    n.value = std::move(y);
    return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId input) {
    checkNode(input, "relu");
    const Tensor& x = val(input);
    Tensor y(x.shape());
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    Node n;
    n.op = Op::Relu;
    n.parents[0] = input;
    n.value = std::move(y);
    return push(std::move(n));
}

Tape::NodeId Tape::maxPool2(NodeId input) {
    checkNode(input, "maxPool2");
    const Tensor& x = val(input);
    if (x.rank() != 3) {
        shapeError("maxPool2", "input must be (c,h,w), got " + x.shapeString());
    }
    const size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    if (h < 2 || w < 2) {
        shapeError("maxPool2", "input " + x.shapeString() + " too small for 2x2 window");
    }
    const size_t oh = h / 2, ow = w / 2;
    Tensor y({c, oh, ow});
    std::vector<size_t> argmax(c * oh * ow);
    for (size_t ci = 0; ci < c; ++ci) {
        for (size_t oy = 0; oy < oh; ++oy) {
            for (size_t ox = 0; ox < ow; ++ox) {
                size_t best = (ci * h + oy * 2) * w + ox * 2;
                double bestVal = x[best];
                // Row-major scan, strict improvement: first maximum wins.
                for (size_t dy = 0; dy < 2; ++dy) {
                    for (size_t dx = 0; dx < 2; ++dx) {
                        const size_t idx =
                            (ci * h + oy * 2 + dy) * w + ox * 2 + dx;
                        if (x[idx] > bestVal) {
                            best = idx;
                            bestVal = x[idx];
                        }
                    }
                }
                const size_t oidx = (ci * oh + oy) * ow + ox;
                y[oidx] = bestVal;
                argmax[oidx] = best;
            }
        }
    }
    Node n;
    n.op = Op::MaxPool2;
    n.parents[0] = input;
    n.value = std::move(y);
    n.argmax = std::move(argmax);
    return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    checkNode(a, "add");
    checkNode(b, "add");
    const Tensor& xa = val(a);
    const Tensor& xb = val(b);
    if (!xa.sameShape(xb)) {
        shapeError("add", "shape " + xa.shapeString() + " vs " +
                              xb.shapeString());
    }
    Tensor y(xa.shape());
    for (size_t i = 0; i < xa.size(); ++i) y[i] = xa[i] + xb[i];
    Node n;
    n.op = Op::Add;
    n.parents[0] = a;
    n.parents[1] = b;
    n.value = std::move(y);
    return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId input, double factor) {
    checkNode(input, "scale");
    if (!std::isfinite(factor)) {
        throw std::invalid_argument("scale: non-finite factor");
    }
    const Tensor& x = val(input);
    Tensor y(x.shape());
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * factor;
    Node n;
    n.op = Op::Scale;
    n.parents[0] = input;
    n.value = std::move(y);
    n.factor = factor;
    return push(std::move(n));
}

Tape::NodeId Tape::softmaxCrossEntropy(NodeId logits, int label) {
    checkNode(logits, "softmaxCrossEntropy");
    const Tensor& l = val(logits);
    if (l.rank() != 1) {
        shapeError("softmaxCrossEntropy",
                   "logits must be rank 1, got " + l.shapeString());
    }
    if (label < 0 || static_cast<size_t>(label) >= l.size()) {
        shapeError("softmaxCrossEntropy",
                   "label " + std::to_string(label) + " out of range for " +
                       l.shapeString());
    }
    const double m = l.maxValue();
    Tensor probs(l.shape());
    double z = 0.0;
    for (size_t i = 0; i < l.size(); ++i) {
        probs[i] = std::exp(l[i] - m);
        z += probs[i];
    }
    for (size_t i = 0; i < l.size(); ++i) probs[i] /= z;
    const double loss = -(l[label] - m - std::log(z));
    Node n;
    n.op = Op::SoftmaxCrossEntropy;
    n.parents[0] = logits;
    n.value = Tensor::scalar(loss);
    n.index = label;
    n.cached = std::move(probs);
    return push(std::move(n));
}

Tape::NodeId Tape::selectLogit(NodeId logits, int classIndex) {
    checkNode(logits, "selectLogit");
    const Tensor& l = val(logits);
    if (l.rank() != 1) {
        shapeError("selectLogit",
                   "logits must be rank 1, got " + l.shapeString());
    }
    if (classIndex < 0 || static_cast<size_t>(classIndex) >= l.size()) {
        shapeError("selectLogit", "class " + std::to_string(classIndex) +
                                      " out of range for " + l.shapeString());
    }
    Node n;
    n.op = Op::SelectLogit;
    n.parents[0] = logits;
    n.value = Tensor::scalar(l[classIndex]);
    n.index = classIndex;
    return push(std::move(n));
}

const Tensor& Tape::Gradients::at(NodeId id) const {
    for (const auto& [leaf, grad] : byLeaf) {
        if (leaf == id) return grad;
    }
    throw std::invalid_argument("gradients: node " + std::to_string(id) +
                                " is not a differentiable leaf");
}

Tape::Gradients Tape::backward(NodeId outputScalar) const {
    checkNode(outputScalar, "backward");
    if (nodes_[outputScalar].value.size() != 1) {
        throw std::invalid_argument(
            "backward: output node must be scalar, got shape " +
            nodes_[outputScalar].value.shapeString());
    }

    std::vector<Tensor> grads(nodes_.size());
    grads[outputScalar] = Tensor::scalar(1.0);

    auto touch = [&](NodeId id) -> Tensor& {
        if (grads[id].empty()) grads[id] = Tensor(nodes_[id].value.shape());
        return grads[id];
    };

    for (NodeId id = outputScalar; id >= 0; --id) {
        if (grads[id].empty()) continue;
        const Node& n = nodes_[id];
        const Tensor& g = grads[id];
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Conv2d: {
                const Tensor& x = nodes_[n.parents[0]].value;
                const Tensor& w = nodes_[n.parents[1]].value;
                Tensor& gx = touch(n.parents[0]);
                Tensor& gw = touch(n.parents[1]);
                Tensor& gb = touch(n.parents[2]);
                const size_t c = x.shape()[0], h = x.shape()[1],
                             wd = x.shape()[2];
                const size_t oc = w.shape()[0], kh = w.shape()[2],
                             kw = w.shape()[3];
                const size_t padH = (kh - 1) / 2, padW = (kw - 1) / 2;
                for (size_t o = 0; o < oc; ++o) {
                    for (size_t oy = 0; oy < h; ++oy) {
                        for (size_t ox = 0; ox < wd; ++ox) {
                            const double go = g[(o * h + oy) * wd + ox];
                            if (go == 0.0) continue;
                            gb[o] += go;
                            for (size_t ci = 0; ci < c; ++ci) {
                                for (size_t ky = 0; ky < kh; ++ky) {
                                    const long iy = static_cast<long>(oy + ky) -
                                                    static_cast<long>(padH);
                                    if (iy < 0 || iy >= static_cast<long>(h))
                                        continue;
                                    for (size_t kx = 0; kx < kw; ++kx) {
                                        const long ix =
                                            static_cast<long>(ox + kx) -
                                            static_cast<long>(padW);
                                        if (ix < 0 ||
                                            ix >= static_cast<long>(wd))
                                            continue;
                                        const size_t xi =
                                            (ci * h + iy) * wd + ix;
                                        const size_t wi =
                                            ((o * c + ci) * kh + ky) * kw + kx;
                                        gx[xi] += go * w[wi];
                                        gw[wi] += go * x[xi];
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case Op::Dense: {
                const Tensor& x = nodes_[n.parents[0]].value;
                const Tensor& w = nodes_[n.parents[1]].value;
                Tensor& gx = touch(n.parents[0]);
                Tensor& gw = touch(n.parents[1]);
                Tensor& gb = touch(n.parents[2]);
                const size_t out = w.shape()[0], in = w.shape()[1];
                for (size_t o = 0; o < out; ++o) {
                    const double go = g[o];
                    if (go == 0.0) continue;
                    gb[o] += go;
                    const double* row = w.data() + o * in;
                    double* gwRow = gw.data() + o * in;
                    for (size_t i = 0; i < in; ++i) {
                        gx[i] += go * row[i];
                        gwRow[i] += go * x[i];
                    }
                }
                break;
            }
            case Op::Relu: {
                const Tensor& x = nodes_[n.parents[0]].value;
                Tensor& gx = touch(n.parents[0]);
                // Subgradient at exactly 0 is 0.
                for (size_t i = 0; i < x.size(); ++i) {
                    if (x[i] > 0.0) gx[i] += g[i];
                }
                break;
            }
            case Op::MaxPool2: {
                Tensor& gx = touch(n.parents[0]);
                for (size_t i = 0; i < n.argmax.size(); ++i) {
                    gx[n.argmax[i]] += g[i];
                }
                break;
            }
            case Op::Add: {
                Tensor& ga = touch(n.parents[0]);
                Tensor& gb = touch(n.parents[1]);
                for (size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case Op::Scale: {
                Tensor& gx = touch(n.parents[0]);
                for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.factor;
                break;
            }
            case Op::SoftmaxCrossEntropy: {
                Tensor& gl = touch(n.parents[0]);
                const Tensor& p = n.cached;
                const double go = g[0];
                for (size_t i = 0; i < p.size(); ++i) {
                    const double onehot =
                        (static_cast<int>(i) == n.index) ? 1.0 : 0.0;
                    gl[i] += go * (p[i] - onehot);
                }
                break;
            }
            case Op::SelectLogit: {
                Tensor& gl = touch(n.parents[0]);
                gl[n.index] += g[0];
                break;
            }
        }
    }

    Gradients result;
    result.byLeaf.reserve(leafMarkers_.size());
    for (NodeId id : leafMarkers_) {
        if (grads[id].empty()) grads[id] = Tensor(nodes_[id].value.shape());
        result.byLeaf.emplace_back(id, std::move(grads[id]));
    }
    return result;
}

}  // namespace aclab
