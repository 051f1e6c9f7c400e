#ifndef ADENET_UTIL_KV_HPP
#define ADENET_UTIL_KV_HPP

#include <map>
#include <string>
#include <vector>

#include "adenet/core/error.hpp"

namespace adenet {

// Flat "key = value" text files; '#' starts a comment. Used for run and
// corpus configs.
std::map<std::string, std::string> read_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

double kv_double(const std::map<std::string, std::string>& kv,
                 const std::string& key, double fallback);
int64_t kv_int(const std::map<std::string, std::string>& kv,
               const std::string& key, int64_t fallback);
std::string kv_str(const std::map<std::string, std::string>& kv,
                   const std::string& key, const std::string& fallback);
bool kv_bool(const std::map<std::string, std::string>& kv,
             const std::string& key, bool fallback);

}  // namespace adenet

#endif  // ADENET_UTIL_KV_HPP
