#pragma once

// The vendored single-header lives at the include root as json.hpp; this
// shim lets sources use the library's conventional include path.
#include <json.hpp>
