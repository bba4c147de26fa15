#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ccrgnn/matrix.hpp"

namespace ccrgnn {

// Handle to a value slot on a Tape.
struct Var {
    int slot = -1;
    bool valid() const { return slot >= 0; }
};

// Reverse-mode differentiation tape over dense double matrices.
//
// Operations append nodes in topological order (inputs always precede
// outputs). backward() seeds the loss adjoint with 1 and walks the tape in
// reverse, accumulating exact adjoints; slots the loss does not reach keep
// adjoint zero. A tape is single-writer during one forward/backward pass;
// distinct tapes are independent.
//
// With recording disabled the same forward values are computed but no
// backward closures are stored (inference mode).
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Leaves. input() copies; input_ref() borrows — the caller must keep the
    // matrix alive and unchanged for the lifetime of the tape.
    Var input(Matrix value);
    Var input_ref(const Matrix* value);
    Var constant(Matrix value) { return input(std::move(value)); }

    const Matrix& value(Var v) const;
    const Matrix& adjoint(Var v) const;  // valid after backward()

    // Elementwise and linear-algebra primitives.
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    Var affine(Var a, double mul, double shift);  // mul * a + shift, elementwise
    Var hadamard(Var a, Var b);
    Var transpose(Var a);
    Var concat_rows(const std::vector<Var>& parts);  // vertical stack
    Var concat_cols(const std::vector<Var>& parts);  // horizontal stack
    Var flatten(Var a);                              // row-major reshape to (n*m) x 1
    Var slice_rows(Var a, int row_begin, int row_end);
    Var outer_sum(Var u, Var w);  // u: a x 1, w: b x 1 -> S with S_ij = u_i + w_j

    // Nonlinearities. leaky_relu keeps subgradient 1 at 0; relu likewise.
    Var leaky_relu(Var a, double slope);
    Var relu(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var clamp(Var a, double lo, double hi);

    // Softmax family (max-subtraction applied for stability).
    Var softmax_over_set(Var scores, const std::vector<int>& index_set);  // scores: n x 1
    Var masked_row_softmax(Var scores, const Matrix& mask);  // per-row softmax over mask != 0
    Var log_softmax(Var scores);                             // scores: n x 1

    // Column-wise aggregation over node rows. row_max routes the gradient to
    // the first argmax row of each column.
    Var row_mean(Var h);  // d x c -> 1 x c
    Var row_max(Var h);   // d x c -> 1 x c

    Var sum(Var a);          // 1 x 1
    Var sum_squares(Var a);  // 1 x 1

    // Reverse sweep from a scalar loss slot.
    void backward(Var loss);

private:
    struct Node {
        Matrix value;                       // owned (unused when external set)
        const Matrix* external = nullptr;   // borrowed leaf value
        Matrix adjoint;
        std::function<void(Tape&)> grad;    // accumulates into input adjoints
    };

    const Matrix& val(int slot) const;
    Matrix& adj(int slot);
    Var push(Matrix value, std::function<void(Tape&)> grad);
    void check_slot(Var v, const char* who) const;

    std::vector<Node> nodes_;
    bool recording_;
};

// Gradient verification against central finite differences.
//
// forward_fn must deterministically build a scalar loss on the given tape
// from the given parameter vars (one Var per entry of `params`, same order).
// Relative error per coordinate is |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    int worst_param = -1;       // index into params
    long long worst_entry = -1; // flat index within that parameter
    long long checked = 0;
    std::string message;  // set when the check aborts (non-finite forward value)
};

GradCheckReport grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& forward_fn,
    const std::vector<Matrix>& params, double h, double tol);

}  // namespace ccrgnn
