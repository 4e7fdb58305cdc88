#pragma once

// In-process stand-in for a message-passing runtime. Each rank runs on its
// own thread; collectives meet at an abortable barrier, so an exception on any
// rank unblocks the others and is rethrown from RankGroup::run.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fpx/bounds.hpp"
#include "fpx/error.hpp"

namespace fpx {

/// Test-only interference with delivery of message `seq` from `from` to `to`.
struct FaultAction {
  bool drop = false;
  std::chrono::microseconds delay{0};
};
using FaultHook = std::function<FaultAction(int from, int to, std::size_t seq)>;

namespace detail {

struct GroupAborted {};

class AbortableBarrier {
 public:
  explicit AbortableBarrier(int count) : count_(count) {}

  void arrive_and_wait() {
    std::unique_lock lk(mu_);
    if (aborted_) throw GroupAborted{};
    const std::uint64_t gen = generation_;
    if (++waiting_ == count_) {
      waiting_ = 0;
      ++generation_;
      cv_.notify_all();
      return;
    }
    cv_.wait(lk, [&] { return generation_ != gen || aborted_; });
    if (generation_ == gen) throw GroupAborted{};
  }

  void abort() {
    std::lock_guard lk(mu_);
    aborted_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_;
  int waiting_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
};

struct GroupState {
  explicit GroupState(int n) : ranks(n), barrier(n), slots(n, nullptr) {}
  int ranks;
  AbortableBarrier barrier;
  std::vector<const void*> slots;
  FaultHook fault;
  std::mutex stats_mu;
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
};

}  // namespace detail

/// One rank's handle on the group. All collective members must be called by
/// every rank in the same order.
class RankContext {
 public:
  RankContext(detail::GroupState& g, int rank) : g_(g), rank_(rank) {}

  int rank() const { return rank_; }
  int size() const { return g_.ranks; }

  void barrier() { g_.barrier.arrive_and_wait(); }

  /// All-to-all: outgoing[dest] is delivered to dest; the result holds
  /// received[src] in the order src sent them. Any lost message raises
  /// TransportError on the receiving rank.
  template <class T>
  std::vector<std::vector<T>> exchange(const std::vector<std::vector<T>>& outgoing) {
    if (static_cast<int>(outgoing.size()) != size())
      throw InvalidArgument("exchange: need one outgoing list per rank");
    g_.slots[rank_] = &outgoing;
    barrier();
    std::vector<std::vector<T>> received(size());
    std::uint64_t got = 0, expected = 0;
    for (int src = 0; src < size(); ++src) {
      const auto& box = static_cast<const std::vector<std::vector<T>>*>(g_.slots[src])->at(rank_);
      expected += box.size();
      if (!g_.fault) {
        received[src] = box;
      } else {
        received[src].reserve(box.size());
        for (std::size_t s = 0; s < box.size(); ++s) {
          const FaultAction act = g_.fault(src, rank_, s);
          if (act.delay.count() > 0) std::this_thread::sleep_for(act.delay);
          if (!act.drop) received[src].push_back(box[s]);
        }
      }
      got += received[src].size();
    }
    {
      std::lock_guard lk(g_.stats_mu);
      std::uint64_t mine = 0;
      for (const auto& v : outgoing) mine += v.size();
      g_.sent += mine;
      g_.received += got;
    }
    std::exception_ptr err;
    if (got != expected)
      err = std::make_exception_ptr(TransportError(
          "rank " + std::to_string(rank_) + " received " + std::to_string(got) + " of " +
          std::to_string(expected) + " messages"));
    barrier();  // senders' buffers stay alive until everyone has copied
    if (err) std::rethrow_exception(err);
    return received;
  }

  template <class T>
  std::vector<T> all_gather(const T& value) {
    std::vector<std::vector<T>> out(size(), std::vector<T>{value});
    const auto in = exchange(out);
    std::vector<T> all;
    all.reserve(size());
    for (const auto& v : in) all.push_back(v.at(0));
    return all;
  }

  /// Folded in rank order, so the result is bitwise identical everywhere.
  double all_reduce_sum(double v) {
    double s = 0.0;
    for (double x : all_gather(v)) s += x;
    return s;
  }
  std::int64_t all_reduce_sum(std::int64_t v) {
    std::int64_t s = 0;
    for (auto x : all_gather(v)) s += x;
    return s;
  }
  double all_reduce_max(double v) {
    double s = -INFINITY;
    for (double x : all_gather(v)) s = std::max(s, x);
    return s;
  }

 private:
  detail::GroupState& g_;
  int rank_;
};

/// Componentwise hull of every rank's box. A rank with nothing to contribute
/// passes a box with lo = +inf, hi = -inf.
inline Aabb reduce_domain_bbox(RankContext& ctx, const Aabb& local) {
  const auto all = ctx.all_gather(local);
  Aabb out = local;
  for (int i = 0; i < 3; ++i) {
    out.lo[i] = INFINITY;
    out.hi[i] = -INFINITY;
  }
  for (const auto& b : all) {
    out.dim = std::max(out.dim, b.dim);
    for (int i = 0; i < 3; ++i) {
      out.lo[i] = std::min(out.lo[i], b.lo[i]);
      out.hi[i] = std::max(out.hi[i], b.hi[i]);
    }
  }
  return out;
}

inline Aabb empty_box(int dim) {
  Aabb b;
  b.dim = dim;
  for (int i = 0; i < 3; ++i) {
    b.lo[i] = INFINITY;
    b.hi[i] = -INFINITY;
  }
  return b;
}

/// A fixed set of simulated ranks. run() executes fn on every rank
/// concurrently (inline when there is a single rank) and rethrows the first
/// failure, preferring the lowest failing rank.
class RankGroup {
 public:
  explicit RankGroup(int ranks) : ranks_(ranks) {
    if (ranks < 1) throw InvalidArgument("rank count must be positive");
  }

  int size() const { return ranks_; }
  void set_fault_hook(FaultHook hook) { fault_ = std::move(hook); }

  std::uint64_t messages_sent() const { return sent_; }
  std::uint64_t messages_received() const { return received_; }

  void run(const std::function<void(RankContext&)>& fn) {
    detail::GroupState state(ranks_);
    state.fault = fault_;
    std::vector<std::exception_ptr> errors(ranks_);
    auto body = [&](int r) {
      RankContext ctx(state, r);
      try {
        fn(ctx);
      } catch (const detail::GroupAborted&) {
        // another rank failed first
      } catch (...) {
        errors[r] = std::current_exception();
        state.barrier.abort();
      }
    };
    if (ranks_ == 1) {
      body(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(ranks_);
      for (int r = 0; r < ranks_; ++r) threads.emplace_back(body, r);
      for (auto& t : threads) t.join();
    }
    sent_ = state.sent;
    received_ = state.received;
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  int ranks_;
  FaultHook fault_;
  std::uint64_t sent_ = 0, received_ = 0;
};

}  // namespace fpx
