#pragma once

#include <chrono>
#include <string>

namespace asc2end {

// Time source for artifact timestamps and ledger wall times. Runs that must be
// byte-reproducible use FixedClock, under which every duration is zero.
class Clock {
 public:
  using time_point = std::chrono::system_clock::time_point;

  virtual ~Clock() = default;
  virtual time_point now() const = 0;

  double elapsed_ms(time_point since) const {
    return std::chrono::duration<double, std::milli>(now() - since).count();
  }
};

class SystemClock final : public Clock {
 public:
  time_point now() const override { return std::chrono::system_clock::now(); }
};

class FixedClock final : public Clock {
 public:
  explicit FixedClock(time_point at = time_point{}) : at_(at) {}
  time_point now() const override { return at_; }

 private:
  time_point at_;
};

// ISO-8601 UTC with millisecond precision, e.g. 2021-03-15T09:30:00.000Z
std::string format_timestamp(Clock::time_point tp);

}  // namespace asc2end
