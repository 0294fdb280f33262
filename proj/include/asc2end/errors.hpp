#pragma once

#include <stdexcept>
#include <string>

namespace asc2end {

// Bad configuration or unusable inputs; the run cannot start.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corpus / criteria / scorecard files that exist but cannot be ingested.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A backend could not be reached or kept failing after all retries.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, bool transient)
      : std::runtime_error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

// A failure while processing one document; the batch keeps going.
class StageError : public std::runtime_error {
 public:
  StageError(std::string doc_id, std::string stage, const std::string& what,
             bool backend_failure = false)
      : std::runtime_error(what),
        doc_id_(std::move(doc_id)),
        stage_(std::move(stage)),
        backend_failure_(backend_failure) {}

  const std::string& doc_id() const noexcept { return doc_id_; }
  const std::string& stage() const noexcept { return stage_; }
  bool backend_failure() const noexcept { return backend_failure_; }

 private:
  std::string doc_id_;
  std::string stage_;
  bool backend_failure_;
};

}  // namespace asc2end
