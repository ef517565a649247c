#include "softbody/hub.hpp"

#include <algorithm>
#include <chrono>

namespace softbody {

using Clock = std::chrono::steady_clock;

class Hub::Runner {
 public:
  explicit Runner(Simulation sim) : sim_(std::move(sim)) { thread_ = std::thread([this] { loop(); }); }

  ~Runner() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }

  void post(std::function<void(Simulation&)> task) {
    {
      std::lock_guard lock(mutex_);
      tasks_.push_back(std::move(task));
    }
    cv_.notify_all();
  }

  void subscribe(int id, double rate_hz, EventSink sink) {
    std::lock_guard lock(mutex_);
    subscribers_.push_back({id, rate_hz, std::move(sink), {}, false});
  }

  void unsubscribe(int id) {
    std::lock_guard lock(mutex_);
    std::erase_if(subscribers_, [id](const Subscriber& s) { return s.id == id; });
  }

 private:
  struct Subscriber {
    int id;
    double rate_hz;
    EventSink sink;
    Clock::time_point last_sent;
    bool sent_once;
  };

  void loop() {
    Clock::time_point deadline = Clock::now();
    for (;;) {
      std::deque<std::function<void(Simulation&)>> tasks;
      {
        std::unique_lock lock(mutex_);
        cv_.wait_until(lock, deadline, [this] { return stop_ || !tasks_.empty(); });
        if (stop_) return;
        tasks.swap(tasks_);
      }
      for (auto& task : tasks) task(sim_);
      if (!tasks.empty() || sim_.status() != last_status_) {
        last_status_ = sim_.status();
        anchored_ = false;
      }
      deadline = tick_once();
    }
  }

  // Advances the instance if it is due and returns when to look again.
  Clock::time_point tick_once() {
    const Clock::time_point now = Clock::now();
    const double publish_period = 1.0 / sim_.params().frame_rate;
    switch (sim_.status()) {
      case SimStatus::Running: {
        anchor(now, sim_.sim_time());
        const double due = anchor_sim_ + seconds(now - anchor_wall_);
        if (sim_.sim_time() > due) return now + to_duration(sim_.sim_time() - due);
        if (due - sim_.sim_time() > 0.25) anchored_ = false;  // too far behind; slow down instead of bursting
        try {
          publish_frame(sim_.step(), now);
        } catch (const Error& e) {
          publish_error(e);
        }
        return now;
      }
      case SimStatus::Playback: {
        if (sim_.playback_remaining() == 0) {
          if (!ended_reported_) {
            ended_reported_ = true;
            publish_error(Error(ErrorCode::EndOfSeries, "playback reached the end of the series"));
          }
          return now + to_duration(publish_period);
        }
        ended_reported_ = false;
        try {
          Frame f = sim_.step_playback();
          anchor(now, f.sim_time);
          const double wait = (f.sim_time - anchor_sim_) - seconds(now - anchor_wall_);
          // The last recorded frame always goes out so viewers settle on it.
          publish_frame(std::move(f), now, sim_.playback_remaining() == 0);
          return wait > 0.0 ? now + to_duration(wait) : now;
        } catch (const Error& e) {
          publish_error(e);
          return now + to_duration(publish_period);
        }
      }
      case SimStatus::Paused:
        if (has_due_subscriber(now)) publish_frame(sim_.current_frame(), now);
        return now + to_duration(std::min(publish_period, 0.05));
    }
    return now + to_duration(publish_period);
  }

  void anchor(Clock::time_point now, double sim_time) {
    if (anchored_) return;
    anchored_ = true;
    anchor_wall_ = now;
    anchor_sim_ = sim_time;
  }

  static double seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }
  static Clock::duration to_duration(double s) {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
  }

  double period_for(const Subscriber& s) const {
    return 1.0 / std::min(s.rate_hz, sim_.params().frame_rate);
  }

  bool has_due_subscriber(Clock::time_point now) {
    std::lock_guard lock(mutex_);
    return std::any_of(subscribers_.begin(), subscribers_.end(), [&](const Subscriber& s) {
      return !s.sent_once || seconds(now - s.last_sent) >= period_for(s);
    });
  }

  void publish_frame(Frame frame, Clock::time_point now, bool force = false) {
    std::vector<EventSink> due;
    {
      std::lock_guard lock(mutex_);
      for (Subscriber& s : subscribers_) {
        if (!force && s.sent_once && seconds(now - s.last_sent) < period_for(s)) continue;
        s.sent_once = true;
        s.last_sent = now;
        due.push_back(s.sink);
      }
    }
    if (due.empty()) return;
    InstanceEvent event;
    event.kind = InstanceEvent::Kind::Frame;
    event.instance_id = sim_.id();
    event.frame = std::move(frame);
    for (const EventSink& sink : due) deliver(sink, event);
  }

  void publish_error(const Error& e) {
    std::vector<EventSink> all;
    {
      std::lock_guard lock(mutex_);
      for (const Subscriber& s : subscribers_) all.push_back(s.sink);
    }
    InstanceEvent event;
    event.kind = InstanceEvent::Kind::Error;
    event.instance_id = sim_.id();
    event.code = e.code();
    event.message = e.what();
    for (const EventSink& sink : all) deliver(sink, event);
  }

  // A failing subscriber must not take the stepping thread down with it.
  static void deliver(const EventSink& sink, const InstanceEvent& event) {
    try {
      sink(event);
    } catch (...) {
    }
  }

  Simulation sim_;
  std::thread thread_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void(Simulation&)>> tasks_;
  std::vector<Subscriber> subscribers_;
  bool stop_ = false;

  SimStatus last_status_ = SimStatus::Paused;
  bool anchored_ = false;
  bool ended_reported_ = false;
  Clock::time_point anchor_wall_;
  double anchor_sim_ = 0.0;
};

Hub::Hub(std::shared_ptr<AlgorithmCatalog> catalog, std::size_t max_instances)
    : catalog_(std::move(catalog)), max_instances_(max_instances) {
  if (!catalog_) catalog_ = AlgorithmCatalog::with_builtins();
}

Hub::~Hub() {
  std::map<int, std::shared_ptr<Runner>> runners;
  {
    std::lock_guard lock(mutex_);
    runners.swap(runners_);
  }
  runners.clear();
}

Hub::Handle Hub::adopt(Simulation sim) {
  std::lock_guard lock(mutex_);
  if (runners_.size() >= max_instances_) {
    throw Error(ErrorCode::InstanceLimit, "at most " + std::to_string(max_instances_) + " instances");
  }
  const int id = sim.id();
  runners_.emplace(id, std::make_shared<Runner>(std::move(sim)));
  return {id, next_view_id_++};
}

Hub::Handle Hub::create(SimulationSnapshot snapshot, SimStatus initial) {
  int id = 0;
  {
    std::lock_guard lock(mutex_);
    if (runners_.size() >= max_instances_) {
      throw Error(ErrorCode::InstanceLimit, "at most " + std::to_string(max_instances_) + " instances");
    }
    id = next_instance_id_++;
  }
  return adopt(Simulation(id, std::move(snapshot), catalog_, initial));
}

Hub::Handle Hub::add_instance(int source_id, AddMode mode, const std::string& integrator_name) {
  if (mode == AddMode::SameAlgorithmNewView) {
    runner(source_id);
    std::lock_guard lock(mutex_);
    return {source_id, next_view_id_++};
  }
  int id = 0;
  {
    std::lock_guard lock(mutex_);
    if (runners_.size() >= max_instances_) {
      throw Error(ErrorCode::InstanceLimit, "at most " + std::to_string(max_instances_) + " instances");
    }
    if (!catalog_->integrators.contains(integrator_name)) {
      throw Error(ErrorCode::UnknownAlgorithm, "no integrator named '" + integrator_name + "'");
    }
    id = next_instance_id_++;
  }
  Simulation copy = execute(source_id, [&](Simulation& sim) { return sim.clone_with_integrator(id, integrator_name); });
  return adopt(std::move(copy));
}

std::shared_ptr<Hub::Runner> Hub::runner(int instance_id) const {
  std::lock_guard lock(mutex_);
  auto it = runners_.find(instance_id);
  if (it == runners_.end()) throw Error(ErrorCode::UnknownInstance, "no instance " + std::to_string(instance_id));
  return it->second;
}

void Hub::post(int instance_id, std::function<void(Simulation&)> task) {
  runner(instance_id)->post(std::move(task));
}

int Hub::subscribe(int instance_id, double rate_hz, EventSink sink) {
  if (!(rate_hz > 0.0)) throw Error(ErrorCode::InvalidParams, "subscription rate must be positive");
  auto r = runner(instance_id);
  int id = 0;
  {
    std::lock_guard lock(mutex_);
    id = next_subscription_id_++;
    subscription_owner_[id] = instance_id;
  }
  r->subscribe(id, rate_hz, std::move(sink));
  return id;
}

void Hub::unsubscribe(int subscription_id) {
  std::shared_ptr<Runner> r;
  {
    std::lock_guard lock(mutex_);
    auto it = subscription_owner_.find(subscription_id);
    if (it == subscription_owner_.end()) return;
    auto owner = runners_.find(it->second);
    if (owner != runners_.end()) r = owner->second;
    subscription_owner_.erase(it);
  }
  if (r) r->unsubscribe(subscription_id);
}

bool Hub::contains(int instance_id) const {
  std::lock_guard lock(mutex_);
  return runners_.contains(instance_id);
}

std::vector<int> Hub::instance_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<int> ids;
  for (const auto& [id, r] : runners_) ids.push_back(id);
  return ids;
}

}  // namespace softbody
