#ifndef ADENET_CORE_TENSOR_HPP
#define ADENET_CORE_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "adenet/core/error.hpp"
#include "adenet/core/rng.hpp"

namespace adenet {

// Tensor storage allocator. Two jobs:
//  - default-initialize scalars (op outputs are always fully overwritten;
//    zero-filling T_a-sized tensors costs real memset bandwidth), and
//  - recycle buffers through a per-thread exact-size free list, since the op
//    graph allocates and frees the same handful of shapes thousands of times
//    per training step and glibc answers large blocks with mmap/munmap.
// Graphs are built and torn down on one thread (OpenMP workers only touch raw
// pointers inside ops), so the thread-local pool needs no locking.
template <class T>
struct PooledAllocator {
  using value_type = T;

  PooledAllocator() = default;
  template <class U>
  PooledAllocator(const PooledAllocator<U>&) {}

  template <class U>
  struct rebind {
    using other = PooledAllocator<U>;
  };

  T* allocate(size_t n) {
    auto& pool = free_lists();
    auto it = pool.find(n);
    if (it != pool.end() && !it->second.empty()) {
      void* p = it->second.back();
      it->second.pop_back();
      return static_cast<T*>(p);
    }
    return static_cast<T*>(
        ::operator new(n * sizeof(T), std::align_val_t(64)));
  }
  void deallocate(T* p, size_t n) noexcept {
    try {
      free_lists()[n].push_back(p);
    } catch (...) {
      ::operator delete(p, std::align_val_t(64));
    }
  }

  template <class U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }

  bool operator==(const PooledAllocator&) const { return true; }
  bool operator!=(const PooledAllocator&) const { return false; }

 private:
  static std::unordered_map<size_t, std::vector<void*>>& free_lists() {
    thread_local std::unordered_map<size_t, std::vector<void*>> pool;
    return pool;
  }
};

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

// Dense row-major tensor. Plain value type; all layout knowledge lives in the
// ops that consume it.
template <class S>
struct Tensor {
  using Storage = std::vector<S, PooledAllocator<S>>;

  Shape shape;
  Storage data;  // uninitialized after resize; see PooledAllocator

  Tensor() = default;
  explicit Tensor(Shape sh) : shape(std::move(sh)), data(shape_numel(shape)) {}
  Tensor(Shape sh, Storage d) : shape(std::move(sh)), data(std::move(d)) {
    check(int64_t(data.size()) == shape_numel(shape), ErrorKind::kShape,
          "tensor data does not match shape " + shape_str(shape));
  }

  static Tensor zeros(Shape sh) {
    Tensor t(std::move(sh));
    std::fill(t.data.begin(), t.data.end(), S(0));
    return t;
  }
  static Tensor full(Shape sh, S v) {
    Tensor t(std::move(sh));
    for (auto& x : t.data) x = v;
    return t;
  }
  static Tensor uniform(Shape sh, Rng& rng, double lo, double hi) {
    Tensor t(std::move(sh));
    for (auto& x : t.data) x = S(rng.uniform(lo, hi));
    return t;
  }
  static Tensor gauss(Shape sh, Rng& rng, double stddev = 1.0) {
    Tensor t(std::move(sh));
    for (auto& x : t.data) x = S(stddev * rng.gauss());
    return t;
  }

  int64_t numel() const { return int64_t(data.size()); }
  int rank() const { return int(shape.size()); }
  int64_t dim(int i) const { return shape[size_t(i)]; }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  S& operator[](int64_t i) { return data[size_t(i)]; }
  const S& operator[](int64_t i) const { return data[size_t(i)]; }

  // 2-D convenience accessors (row-major).
  S& at(int64_t i, int64_t j) { return data[size_t(i * shape[1] + j)]; }
  const S& at(int64_t i, int64_t j) const { return data[size_t(i * shape[1] + j)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (const auto& x : data)
      if (!std::isfinite(double(x))) return false;
    return true;
  }

  template <class T2>
  Tensor<T2> cast() const {
    Tensor<T2> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = T2(data[i]);
    return out;
  }
};

}  // namespace adenet

#endif  // ADENET_CORE_TENSOR_HPP
