// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

namespace nexus {

/// Owns detached-style worker threads and joins them on demand. Finished
/// threads are reaped whenever a new one starts.
class TaskSet {
 public:
  TaskSet() = default;
  TaskSet(const TaskSet&) = delete;
  TaskSet& operator=(const TaskSet&) = delete;
  ~TaskSet() { join_all(); }

  void spawn(std::function<void()> fn) {
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu_);
    reap_locked();
    tasks_.push_back({std::thread([fn = std::move(fn), done] {
                        fn();
                        *done = true;
                      }),
                      done});
  }

  void join_all() {
    for (;;) {
      std::list<Task> tasks;
      {
        std::lock_guard lock(mu_);
        if (tasks_.empty()) return;
        tasks.swap(tasks_);
      }
      for (auto& t : tasks) t.thread.join();
    }
  }

  std::size_t running() {
    std::lock_guard lock(mu_);
    reap_locked();
    return tasks_.size();
  }

 private:
  struct Task {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap_locked() {
    for (auto it = tasks_.begin(); it != tasks_.end();) {
      if (*it->done) {
        it->thread.join();
        it = tasks_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::mutex mu_;
  std::list<Task> tasks_;
};

}  // namespace nexus
