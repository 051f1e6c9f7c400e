#ifndef ADENET_CORE_AUTOGRAD_HPP
#define ADENET_CORE_AUTOGRAD_HPP

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "adenet/core/tensor.hpp"

namespace adenet {

// Reverse-mode tape. Every op builds a Node whose backward_fn scatters the
// node's grad into its parents. With gradients disabled (inference) ops
// return parent-free nodes, so intermediates are freed as soon as the last
// shared_ptr drops.

namespace detail {
inline thread_local int no_grad_depth = 0;
}

inline bool grad_enabled() { return detail::no_grad_depth == 0; }

struct NoGradGuard {
  NoGradGuard() { ++detail::no_grad_depth; }
  ~NoGradGuard() { --detail::no_grad_depth; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <class S>
struct Node {
  Tensor<S> value;
  Tensor<S> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::function<void(Node<S>&)> backward_fn;
  std::string name;  // nonempty for parameters

  void ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor<S>::zeros(value.shape);
  }
  void zero_grad() {
    if (grad.numel()) std::fill(grad.data.begin(), grad.data.end(), S(0));
  }
};

template <class S>
using Var = std::shared_ptr<Node<S>>;

template <class S>
Var<S> constant(Tensor<S> v) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(v);
  return n;
}

template <class S>
Var<S> leaf(Tensor<S> v, std::string name = "") {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(v);
  n->requires_grad = true;
  n->name = std::move(name);
  return n;
}

template <class S>
Var<S> make_node(Tensor<S> value, std::vector<Var<S>> parents,
                 std::function<void(Node<S>&)> backward_fn) {
  bool need = false;
  if (grad_enabled())
    for (const auto& p : parents)
      if (p && p->requires_grad) {
        need = true;
        break;
      }
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  if (need) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

// Accumulates `root`'s seed gradient (ones) through the tape.
template <class S>
void backward(const Var<S>& root) {
  check(root != nullptr && root->requires_grad, ErrorKind::kTrain,
        "backward() on a non-differentiable node");
  // Iterative topological order over the reachable subgraph.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> seen;
  std::vector<std::pair<Node<S>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<S>* p = node->parents[idx].get();
      ++idx;
      if (p && p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->ensure_grad();
  for (auto& g : root->grad.data) g = S(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace adenet

#endif  // ADENET_CORE_AUTOGRAD_HPP
