#pragma once

#include <string>
#include <utility>

namespace gptpat::internal {

// httplib clients take scheme://host[:port] only; any path component has to
// travel with the request. Splits "https://host:1234/v1" into
// {"https://host:1234", "/v1"}.
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_begin = url.find('/', host_begin);
  if (path_begin == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_begin), prefix};
}

}  // namespace gptpat::internal
