#include <algorithm>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "terramap/app/runner.hpp"
#include "terramap/error.hpp"

#ifndef TERRAMAP_VERSION
#define TERRAMAP_VERSION "0.0.0"
#endif

namespace terramap::app {

std::string_view tool_version() { return TERRAMAP_VERSION; }

std::string sha256_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", file.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest initialization failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::vector<fs::path>& files) {
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.generic_string());
  std::sort(names.begin(), names.end());

  Json m;
  m["tool"] = "terramap";
  m["version"] = tool_version();
  m["seed"] = cfg.scenario.seed;
  m["config"] = cfg.document;
  Json digests = Json::object();
  for (const auto& n : names) digests[n] = sha256_file(dir / n);
  m["files"] = std::move(digests);

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", (dir / "manifest.json").string()));
  out << m.dump(2) << '\n';
}

}  // namespace terramap::app
