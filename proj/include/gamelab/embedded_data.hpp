#pragma once

#include <string_view>
#include <vector>

namespace gamelab {

// Files under data/ compiled into the library, keyed by relative path
// (e.g. "templates/system.tmpl"). Throws ConfigError for unknown names.
std::string_view embedded_file(std::string_view name);
std::vector<std::string_view> embedded_file_names();

}  // namespace gamelab
