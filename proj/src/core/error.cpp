// SPDX-License-Identifier: Apache-2.0
#include "projdens/error.hpp"

namespace projdens {

const char *errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::domain: return "domain error";
  case Errc::bounds: return "bounds error";
  case Errc::state: return "state error";
  case Errc::config: return "configuration error";
  case Errc::schema: return "schema error";
  case Errc::io: return "i/o error";
  case Errc::accuracy: return "accuracy error";
  case Errc::search_exhausted: return "search exhausted";
  case Errc::model: return "model error";
  }
  return "unknown error";
}

} // namespace projdens
