#include "ccrgnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

namespace {

void accum(Matrix& dst, const Matrix& src) {
    for (long long i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

}  // namespace

const Matrix& Tape::val(int slot) const {
    const Node& n = nodes_[static_cast<size_t>(slot)];
    return n.external ? *n.external : n.value;
}

Matrix& Tape::adj(int slot) { return nodes_[static_cast<size_t>(slot)].adjoint; }

void Tape::check_slot(Var v, const char* who) const {
    require(v.valid() && v.slot < size(), std::string(who) + ": invalid Var");
}

Var Tape::push(Matrix value, std::function<void(Tape&)> grad) {
    Node n;
    n.value = std::move(value);
    if (recording_) n.grad = std::move(grad);
    nodes_.push_back(std::move(n));
    return Var{size() - 1};
}

Var Tape::input(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{size() - 1};
}

Var Tape::input_ref(const Matrix* value) {
    require(value != nullptr, "input_ref: null matrix");
    Node n;
    n.external = value;
    nodes_.push_back(std::move(n));
    return Var{size() - 1};
}

const Matrix& Tape::value(Var v) const {
    check_slot(v, "value");
    return val(v.slot);
}

const Matrix& Tape::adjoint(Var v) const {
    check_slot(v, "adjoint");
    return nodes_[static_cast<size_t>(v.slot)].adjoint;
}

Var Tape::matmul(Var a, Var b) {
    check_slot(a, "matmul");
    check_slot(b, "matmul");
    Matrix out = ccrgnn::matmul(val(a.slot), val(b.slot));  // shape-checked inside
    const int as = a.slot, bs = b.slot, os = size();
    return push(std::move(out), [as, bs, os](Tape& t) {
        const Matrix& A = t.val(as);
        const Matrix& B = t.val(bs);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        Matrix& dB = t.adj(bs);
        const int n = A.rows(), k = A.cols(), m = B.cols();
        // dA += dC * B^T (rows of dC dotted with rows of B)
        for (int i = 0; i < n; ++i) {
            const double* dcrow = dC.data().data() + static_cast<size_t>(i) * m;
            double* darow = dA.data().data() + static_cast<size_t>(i) * k;
            for (int t2 = 0; t2 < k; ++t2) {
                const double* brow = B.data().data() + static_cast<size_t>(t2) * m;
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += dcrow[j] * brow[j];
                darow[t2] += s;
            }
        }
        // dB += A^T * dC (axpy rows of dC into rows of dB)
        for (int i = 0; i < n; ++i) {
            const double* arow = A.data().data() + static_cast<size_t>(i) * k;
            const double* dcrow = dC.data().data() + static_cast<size_t>(i) * m;
            for (int t2 = 0; t2 < k; ++t2) {
                const double av = arow[t2];
                if (av == 0.0) continue;
                double* dbrow = dB.data().data() + static_cast<size_t>(t2) * m;
                for (int j = 0; j < m; ++j) dbrow[j] += av * dcrow[j];
            }
        }
    });
}

Var Tape::add(Var a, Var b) {
    check_slot(a, "add");
    check_slot(b, "add");
    Matrix out = ccrgnn::add(val(a.slot), val(b.slot));
    const int as = a.slot, bs = b.slot, os = size();
    return push(std::move(out), [as, bs, os](Tape& t) {
        accum(t.adj(as), t.adj(os));
        accum(t.adj(bs), t.adj(os));
    });
}

Var Tape::sub(Var a, Var b) {
    check_slot(a, "sub");
    check_slot(b, "sub");
    Matrix out = ccrgnn::sub(val(a.slot), val(b.slot));
    const int as = a.slot, bs = b.slot, os = size();
    return push(std::move(out), [as, bs, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        accum(t.adj(as), dC);
        Matrix& dB = t.adj(bs);
        for (long long i = 0; i < dB.size(); ++i) dB.data()[i] -= dC.data()[i];
    });
}

Var Tape::scale(Var a, double s) { return affine(a, s, 0.0); }

Var Tape::affine(Var a, double mul, double shift) {
    check_slot(a, "affine");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) v = mul * v + shift;
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os, mul](Tape& t) {
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) dA.data()[i] += mul * dC.data()[i];
    });
}

Var Tape::hadamard(Var a, Var b) {
    check_slot(a, "hadamard");
    check_slot(b, "hadamard");
    Matrix out = ccrgnn::hadamard(val(a.slot), val(b.slot));
    const int as = a.slot, bs = b.slot, os = size();
    return push(std::move(out), [as, bs, os](Tape& t) {
        const Matrix& A = t.val(as);
        const Matrix& B = t.val(bs);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        Matrix& dB = t.adj(bs);
        for (long long i = 0; i < dC.size(); ++i) {
            dA.data()[i] += dC.data()[i] * B.data()[i];
            dB.data()[i] += dC.data()[i] * A.data()[i];
        }
    });
}

Var Tape::transpose(Var a) {
    check_slot(a, "transpose");
    Matrix out = ccrgnn::transpose(val(a.slot));
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (int i = 0; i < dC.rows(); ++i)
            for (int j = 0; j < dC.cols(); ++j) dA.at(j, i) += dC.at(i, j);
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_rows: no parts");
    int total_rows = 0;
    const int cols = value(parts[0]).cols();
    for (Var p : parts) {
        check_slot(p, "concat_rows");
        const Matrix& m = val(p.slot);
        require(m.cols() == cols, "concat_rows column mismatch: " + m.shape_str());
        total_rows += m.rows();
    }
    Matrix out(total_rows, cols);
    int off = 0;
    std::vector<int> slots;
    std::vector<int> offsets;
    for (Var p : parts) {
        const Matrix& m = val(p.slot);
        std::copy(m.data().begin(), m.data().end(),
                  out.data().begin() + static_cast<size_t>(off) * cols);
        slots.push_back(p.slot);
        offsets.push_back(off);
        off += m.rows();
    }
    const int os = size();
    return push(std::move(out), [slots, offsets, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        for (size_t k = 0; k < slots.size(); ++k) {
            Matrix& dP = t.adj(slots[k]);
            const size_t base = static_cast<size_t>(offsets[k]) * dC.cols();
            for (long long i = 0; i < dP.size(); ++i) dP.data()[i] += dC.data()[base + i];
        }
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_cols: no parts");
    const int rows = value(parts[0]).rows();
    int total_cols = 0;
    for (Var p : parts) {
        check_slot(p, "concat_cols");
        const Matrix& m = val(p.slot);
        require(m.rows() == rows, "concat_cols row mismatch: " + m.shape_str());
        total_cols += m.cols();
    }
    Matrix out(rows, total_cols);
    int off = 0;
    std::vector<int> slots;
    std::vector<int> offsets;
    std::vector<int> widths;
    for (Var p : parts) {
        const Matrix& m = val(p.slot);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < m.cols(); ++c) out.at(r, off + c) = m.at(r, c);
        slots.push_back(p.slot);
        offsets.push_back(off);
        widths.push_back(m.cols());
        off += m.cols();
    }
    const int os = size();
    return push(std::move(out), [slots, offsets, widths, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        for (size_t k = 0; k < slots.size(); ++k) {
            Matrix& dP = t.adj(slots[k]);
            for (int r = 0; r < dP.rows(); ++r)
                for (int c = 0; c < widths[k]; ++c) dP.at(r, c) += dC.at(r, offsets[k] + c);
        }
    });
}

Var Tape::flatten(Var a) {
    check_slot(a, "flatten");
    const Matrix& A = val(a.slot);
    Matrix out(static_cast<int>(A.size()), 1, A.data());
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) dA.data()[i] += dC.data()[i];
    });
}

Var Tape::slice_rows(Var a, int row_begin, int row_end) {
    check_slot(a, "slice_rows");
    const Matrix& A = val(a.slot);
    require(0 <= row_begin && row_begin < row_end && row_end <= A.rows(),
            "slice_rows: bad range [" + std::to_string(row_begin) + "," +
                std::to_string(row_end) + ") for " + A.shape_str());
    const int cols = A.cols();
    Matrix out(row_end - row_begin, cols);
    std::copy(A.data().begin() + static_cast<size_t>(row_begin) * cols,
              A.data().begin() + static_cast<size_t>(row_end) * cols, out.data().begin());
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os, row_begin, cols](Tape& t) {
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        const size_t base = static_cast<size_t>(row_begin) * cols;
        for (long long i = 0; i < dC.size(); ++i) dA.data()[base + i] += dC.data()[i];
    });
}

Var Tape::outer_sum(Var u, Var w) {
    check_slot(u, "outer_sum");
    check_slot(w, "outer_sum");
    const Matrix& U = val(u.slot);
    const Matrix& W = val(w.slot);
    require(U.cols() == 1 && W.cols() == 1, "outer_sum: inputs must be column vectors, got " +
                                                U.shape_str() + " and " + W.shape_str());
    Matrix out(U.rows(), W.rows());
    for (int i = 0; i < U.rows(); ++i)
        for (int j = 0; j < W.rows(); ++j) out.at(i, j) = U.at(i, 0) + W.at(j, 0);
    const int us = u.slot, ws = w.slot, os = size();
    return push(std::move(out), [us, ws, os](Tape& t) {
        const Matrix& dC = t.adj(os);
        Matrix& dU = t.adj(us);
        Matrix& dW = t.adj(ws);
        for (int i = 0; i < dC.rows(); ++i)
            for (int j = 0; j < dC.cols(); ++j) {
                dU.at(i, 0) += dC.at(i, j);
                dW.at(j, 0) += dC.at(i, j);
            }
    });
}

Var Tape::leaky_relu(Var a, double slope) {
    check_slot(a, "leaky_relu");
    require(slope > 0.0 && slope < 1.0, "leaky_relu: slope must lie in (0,1)");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) v = (v >= 0.0) ? v : slope * v;
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os, slope](Tape& t) {
        const Matrix& A2 = t.val(as);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i)
            dA.data()[i] += dC.data()[i] * (A2.data()[i] >= 0.0 ? 1.0 : slope);
    });
}

Var Tape::relu(Var a) {
    check_slot(a, "relu");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) v = (v >= 0.0) ? v : 0.0;
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os](Tape& t) {
        const Matrix& A2 = t.val(as);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i)
            dA.data()[i] += dC.data()[i] * (A2.data()[i] >= 0.0 ? 1.0 : 0.0);
    });
}

Var Tape::exp(Var a) {
    check_slot(a, "exp");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) v = std::exp(v);
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os](Tape& t) {
        const Matrix& Y = t.val(os);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) dA.data()[i] += dC.data()[i] * Y.data()[i];
    });
}

Var Tape::log(Var a) {
    check_slot(a, "log");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) {
        require(v > 0.0, "log: non-positive entry " + std::to_string(v));
        v = std::log(v);
    }
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os](Tape& t) {
        const Matrix& A2 = t.val(as);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) dA.data()[i] += dC.data()[i] / A2.data()[i];
    });
}

Var Tape::clamp(Var a, double lo, double hi) {
    check_slot(a, "clamp");
    require(lo <= hi, "clamp: lo > hi");
    const Matrix& A = val(a.slot);
    Matrix out = A;
    for (double& v : out.data()) v = std::min(std::max(v, lo), hi);
    const int as = a.slot, os = size();
    return push(std::move(out), [as, os, lo, hi](Tape& t) {
        const Matrix& A2 = t.val(as);
        const Matrix& dC = t.adj(os);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) {
            const double x = A2.data()[i];
            if (x >= lo && x <= hi) dA.data()[i] += dC.data()[i];
        }
    });
}

Var Tape::softmax_over_set(Var scores, const std::vector<int>& index_set) {
    check_slot(scores, "softmax_over_set");
    const Matrix& S = val(scores.slot);
    require(S.cols() == 1, "softmax_over_set: scores must be a column vector");
    require(!index_set.empty(), "softmax_over_set: empty index set");
    std::set<int> seen;
    for (int i : index_set) {
        require(i >= 0 && i < S.rows(), "softmax_over_set: index out of range");
        require(seen.insert(i).second, "softmax_over_set: duplicate index");
    }
    double mx = S.at(index_set[0], 0);
    for (int i : index_set) mx = std::max(mx, S.at(i, 0));
    Matrix out(S.rows(), 1);
    double z = 0.0;
    for (int i : index_set) {
        const double e = std::exp(S.at(i, 0) - mx);
        out.at(i, 0) = e;
        z += e;
    }
    for (int i : index_set) out.at(i, 0) /= z;
    const int ss = scores.slot, os = size();
    std::vector<int> idx = index_set;
    return push(std::move(out), [ss, os, idx](Tape& t) {
        const Matrix& Y = t.val(os);
        const Matrix& dY = t.adj(os);
        Matrix& dS = t.adj(ss);
        double dot = 0.0;
        for (int i : idx) dot += dY.at(i, 0) * Y.at(i, 0);
        for (int i : idx) dS.at(i, 0) += Y.at(i, 0) * (dY.at(i, 0) - dot);
    });
}

Var Tape::masked_row_softmax(Var scores, const Matrix& mask) {
    check_slot(scores, "masked_row_softmax");
    const Matrix& S = val(scores.slot);
    require(S.same_shape(mask), "masked_row_softmax: mask shape " + mask.shape_str() +
                                    " does not match scores " + S.shape_str());
    Matrix out(S.rows(), S.cols());
    for (int r = 0; r < S.rows(); ++r) {
        double mx = 0.0;
        bool any = false;
        for (int c = 0; c < S.cols(); ++c) {
            if (mask.at(r, c) == 0.0) continue;
            mx = any ? std::max(mx, S.at(r, c)) : S.at(r, c);
            any = true;
        }
        require(any, "masked_row_softmax: row " + std::to_string(r) + " has empty mask");
        double z = 0.0;
        for (int c = 0; c < S.cols(); ++c) {
            if (mask.at(r, c) == 0.0) continue;
            const double e = std::exp(S.at(r, c) - mx);
            out.at(r, c) = e;
            z += e;
        }
        for (int c = 0; c < S.cols(); ++c) {
            if (mask.at(r, c) != 0.0) out.at(r, c) /= z;
        }
    }
    const int ss = scores.slot, os = size();
    Matrix mask_copy = mask;
    return push(std::move(out), [ss, os, mask_copy](Tape& t) {
        const Matrix& Y = t.val(os);
        const Matrix& dY = t.adj(os);
        Matrix& dS = t.adj(ss);
        for (int r = 0; r < Y.rows(); ++r) {
            double dot = 0.0;
            for (int c = 0; c < Y.cols(); ++c) {
                if (mask_copy.at(r, c) != 0.0) dot += dY.at(r, c) * Y.at(r, c);
            }
            for (int c = 0; c < Y.cols(); ++c) {
                if (mask_copy.at(r, c) != 0.0)
                    dS.at(r, c) += Y.at(r, c) * (dY.at(r, c) - dot);
            }
        }
    });
}

Var Tape::log_softmax(Var scores) {
    check_slot(scores, "log_softmax");
    const Matrix& S = val(scores.slot);
    require(S.cols() == 1 && S.rows() >= 1, "log_softmax: scores must be a non-empty column");
    const double mx = max_entry(S);
    double z = 0.0;
    for (int i = 0; i < S.rows(); ++i) z += std::exp(S.at(i, 0) - mx);
    const double lse = mx + std::log(z);
    Matrix out(S.rows(), 1);
    for (int i = 0; i < S.rows(); ++i) out.at(i, 0) = S.at(i, 0) - lse;
    const int ss = scores.slot, os = size();
    return push(std::move(out), [ss, os](Tape& t) {
        const Matrix& Y = t.val(os);
        const Matrix& dY = t.adj(os);
        Matrix& dS = t.adj(ss);
        double total = 0.0;
        for (int i = 0; i < Y.rows(); ++i) total += dY.at(i, 0);
        for (int i = 0; i < Y.rows(); ++i)
            dS.at(i, 0) += dY.at(i, 0) - std::exp(Y.at(i, 0)) * total;
    });
}

Var Tape::row_mean(Var h) {
    check_slot(h, "row_mean");
    const Matrix& H = val(h.slot);
    require(H.rows() >= 1, "row_mean: empty input");
    Matrix out(1, H.cols());
    for (int r = 0; r < H.rows(); ++r)
        for (int c = 0; c < H.cols(); ++c) out.at(0, c) += H.at(r, c);
    for (int c = 0; c < H.cols(); ++c) out.at(0, c) /= H.rows();
    const int hs = h.slot, os = size();
    return push(std::move(out), [hs, os](Tape& t) {
        const Matrix& dY = t.adj(os);
        Matrix& dH = t.adj(hs);
        const double inv = 1.0 / dH.rows();
        for (int r = 0; r < dH.rows(); ++r)
            for (int c = 0; c < dH.cols(); ++c) dH.at(r, c) += dY.at(0, c) * inv;
    });
}

Var Tape::row_max(Var h) {
    check_slot(h, "row_max");
    const Matrix& H = val(h.slot);
    require(H.rows() >= 1, "row_max: empty input");
    Matrix out(1, H.cols());
    std::vector<int> argmax(static_cast<size_t>(H.cols()), 0);
    for (int c = 0; c < H.cols(); ++c) {
        double best = H.at(0, c);
        int best_r = 0;
        for (int r = 1; r < H.rows(); ++r) {
            if (H.at(r, c) > best) {  // strict: ties keep the lowest row index
                best = H.at(r, c);
                best_r = r;
            }
        }
        out.at(0, c) = best;
        argmax[static_cast<size_t>(c)] = best_r;
    }
    const int hs = h.slot, os = size();
    return push(std::move(out), [hs, os, argmax](Tape& t) {
        const Matrix& dY = t.adj(os);
        Matrix& dH = t.adj(hs);
        for (int c = 0; c < dH.cols(); ++c)
            dH.at(argmax[static_cast<size_t>(c)], c) += dY.at(0, c);
    });
}

Var Tape::sum(Var a) {
    check_slot(a, "sum");
    const Matrix& A = val(a.slot);
    double s = 0.0;
    for (double v : A.data()) s += v;
    const int as = a.slot, os = size();
    return push(Matrix(1, 1, {s}), [as, os](Tape& t) {
        const double d = t.adj(os).at(0, 0);
        Matrix& dA = t.adj(as);
        for (double& v : dA.data()) v += d;
    });
}

Var Tape::sum_squares(Var a) {
    check_slot(a, "sum_squares");
    const Matrix& A = val(a.slot);
    const double s = frobenius_sq(A);
    const int as = a.slot, os = size();
    return push(Matrix(1, 1, {s}), [as, os](Tape& t) {
        const double d = t.adj(os).at(0, 0);
        const Matrix& A2 = t.val(as);
        Matrix& dA = t.adj(as);
        for (long long i = 0; i < dA.size(); ++i) dA.data()[i] += 2.0 * d * A2.data()[i];
    });
}

void Tape::backward(Var loss) {
    check_slot(loss, "backward");
    require(recording_, "backward: tape was created in inference mode");
    const Matrix& L = val(loss.slot);
    require(L.rows() == 1 && L.cols() == 1,
            "backward: loss must be scalar (1x1), got " + L.shape_str());
    for (int i = 0; i < size(); ++i) {
        const Matrix& v = val(i);
        nodes_[static_cast<size_t>(i)].adjoint = Matrix::zeros(v.rows(), v.cols());
    }
    adj(loss.slot).at(0, 0) = 1.0;
    for (int i = loss.slot; i >= 0; --i) {
        auto& g = nodes_[static_cast<size_t>(i)].grad;
        if (g) g(*this);
    }
}

GradCheckReport grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& forward_fn,
    const std::vector<Matrix>& params, double h, double tol) {
    GradCheckReport report;

    auto eval = [&](const std::vector<Matrix>& p, std::string* where) -> double {
        Tape tape(false);
        std::vector<Var> vars;
        vars.reserve(p.size());
        for (const Matrix& m : p) vars.push_back(tape.input_ref(&m));
        Var loss = forward_fn(tape, vars);
        const Matrix& L = tape.value(loss);
        require(L.rows() == 1 && L.cols() == 1, "grad_check: forward_fn must return a scalar");
        const double v = L.at(0, 0);
        if (!std::isfinite(v) && where) *where = "non-finite forward value";
        return v;
    };

    // Reverse-mode gradients.
    Tape tape(true);
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Matrix& m : params) vars.push_back(tape.input_ref(&m));
    Var loss = forward_fn(tape, vars);
    const double base = tape.value(loss).at(0, 0);
    if (!std::isfinite(base)) {
        report.message = "aborted: non-finite forward value at base point";
        return report;
    }
    tape.backward(loss);
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (Var v : vars) analytic.push_back(tape.adjoint(v));

    // Central differences per scalar parameter.
    std::vector<Matrix> work = params;
    for (size_t p = 0; p < work.size(); ++p) {
        for (long long i = 0; i < work[p].size(); ++i) {
            const double orig = work[p].data()[i];
            std::string where;
            work[p].data()[i] = orig + h;
            const double fp = eval(work, &where);
            work[p].data()[i] = orig - h;
            const double fm = eval(work, &where);
            work[p].data()[i] = orig;
            if (!where.empty()) {
                report.message = "aborted: " + where + " at param " + std::to_string(p) +
                                 " entry " + std::to_string(i);
                report.pass = false;
                return report;
            }
            const double g_fd = (fp - fm) / (2.0 * h);
            const double g_ad = analytic[p].data()[i];
            const double rel =
                std::abs(g_ad - g_fd) / std::max(1e-8, std::abs(g_ad) + std::abs(g_fd));
            ++report.checked;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = static_cast<int>(p);
                report.worst_entry = i;
            }
        }
    }
    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace ccrgnn
