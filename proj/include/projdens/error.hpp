// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace projdens {

enum class Errc {
  domain = 1,        // argument outside the mathematical domain
  bounds,            // index beyond a tracked or admissible range
  state,             // object not in a usable state (e.g. empty accumulator)
  config,            // inconsistent configuration (basis mismatch, bad spec)
  schema,            // malformed JSON input
  io,                // file could not be read or written
  accuracy,          // numerical accuracy target not met
  search_exhausted,  // no admissible index within the search cap
  model,             // model cannot be used for the requested operation
};

const char *errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace projdens
