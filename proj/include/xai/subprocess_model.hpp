#pragma once

#include <string>

#include "xai/model.hpp"

namespace xai {

// Spawns `command` through /bin/sh and wraps it as a non-differentiable
// black-box ModelHandle speaking the line-delimited JSON protocol:
//   -> {"type":"spec"}
//   <- {"type":"spec","task":...,"n_outputs":K}
//   -> {"type":"predict","id":N,"inputs":[[...],...]}
//   <- {"type":"predict","id":N,"outputs":[[...],...]}
//   -> {"type":"shutdown"}       (child exits 0)
// Requests are serialized: one in flight at a time, ids increasing from 1.
// Any unexpected child line raises a protocol error naming the request id.
ModelHandle spawn_external(const std::string& command);

}  // namespace xai
