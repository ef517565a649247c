#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "softbody/engine.hpp"

namespace softbody {

struct InstanceEvent {
  enum class Kind { Frame, Error };
  Kind kind = Kind::Frame;
  int instance_id = 0;
  Frame frame;
  ErrorCode code = ErrorCode::InvalidParams;
  std::string message;
};

/// Called on the instance's stepping thread; must not block.
using EventSink = std::function<void(const InstanceEvent&)>;

enum class AddMode { SameAlgorithmNewView, NewAlgorithm };

/// Owns one stepping thread per instance. External mutation goes through an
/// ordered command queue drained at step boundaries; frames fan out to
/// subscribers, each decimated to its own rate.
class Hub {
 public:
  explicit Hub(std::shared_ptr<AlgorithmCatalog> catalog, std::size_t max_instances = 8);
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  struct Handle {
    int instance_id = 0;
    int view_id = 0;
  };

  /// Throws InstanceLimit when the hub is full.
  Handle create(SimulationSnapshot snapshot, SimStatus initial = SimStatus::Paused);
  Handle add_instance(int source_id, AddMode mode, const std::string& integrator_name = {});

  /// Runs `fn(Simulation&)` on the instance's thread between steps and returns its result.
  template <class F>
  auto execute(int instance_id, F&& fn) -> std::invoke_result_t<F&, Simulation&> {
    using R = std::invoke_result_t<F&, Simulation&>;
    auto task = std::make_shared<std::packaged_task<R(Simulation&)>>(std::forward<F>(fn));
    std::future<R> result = task->get_future();
    post(instance_id, [task](Simulation& sim) { (*task)(sim); });
    return result.get();
  }

  int subscribe(int instance_id, double rate_hz, EventSink sink);
  void unsubscribe(int subscription_id);

  bool contains(int instance_id) const;
  std::vector<int> instance_ids() const;
  AlgorithmCatalog& catalog() { return *catalog_; }
  const std::shared_ptr<AlgorithmCatalog>& catalog_ptr() const { return catalog_; }
  std::size_t max_instances() const { return max_instances_; }

 private:
  class Runner;

  std::shared_ptr<Runner> runner(int instance_id) const;
  void post(int instance_id, std::function<void(Simulation&)> task);
  Handle adopt(Simulation sim);

  std::shared_ptr<AlgorithmCatalog> catalog_;
  std::size_t max_instances_;
  mutable std::mutex mutex_;
  std::map<int, std::shared_ptr<Runner>> runners_;
  std::map<int, int> subscription_owner_;
  int next_instance_id_ = 1;
  int next_view_id_ = 1;
  int next_subscription_id_ = 1;
};

}  // namespace softbody
