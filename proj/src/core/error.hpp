#ifndef EQHMM_CORE_ERROR_HPP
#define EQHMM_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eqhmm {

enum class ErrorCode {
  io,                      // file missing / unreadable / unwritable
  parse,                   // malformed CSV/JSON input
  invalid_argument,        // bad configuration or argument combination
  insufficient_data,       // not enough events/observations
  degenerate_geometry,     // fewer than two distinct locations
  impossible_observation,  // likelihood underflows to exactly zero
  degenerate_state,        // a state lost all posterior mass
  fit_failure,             // every grid start failed
  numeric,                 // other numerical failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace eqhmm

#endif
