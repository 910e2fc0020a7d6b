#pragma once

#include <json.hpp>

namespace moenas {

// Insertion-ordered so serialized records follow canonical field order.
using Json = nlohmann::ordered_json;

} // namespace moenas
