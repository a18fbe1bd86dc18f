#include "giant/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <ctime>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace giant {

void write_checkpoint(
    const std::string& path, nlohmann::json manifest,
    const std::vector<std::pair<std::string, const Matrix*>>& f64_blocks,
    const std::vector<std::pair<std::string, const std::vector<int>*>>&
        i32_blocks) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [name, m] : f64_blocks)
    blocks.push_back({{"name", name},
                      {"kind", "f64"},
                      {"rows", m->rows()},
                      {"cols", m->cols()}});
  for (const auto& [name, v] : i32_blocks)
    blocks.push_back({{"name", name},
                      {"kind", "i32"},
                      {"rows", static_cast<Index>(v->size())},
                      {"cols", 1}});
  manifest["blocks"] = std::move(blocks);
  if (!manifest.contains("created_unix"))
    manifest["created_unix"] = static_cast<std::int64_t>(std::time(nullptr));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out << manifest.dump() << '\n';
  for (const auto& [name, m] : f64_blocks) {
    // Emit row-major so the layout is independent of Eigen's default.
    for (Index i = 0; i < m->rows(); ++i)
      for (Index j = 0; j < m->cols(); ++j) {
        const double v = (*m)(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
  }
  for (const auto& [name, v] : i32_blocks) {
    for (const int x : *v) {
      const std::int32_t y = x;
      out.write(reinterpret_cast<const char*>(&y), sizeof(std::int32_t));
    }
  }
  if (!out) throw ConfigError("write failed: " + path);
}

LoadedCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("checkpoint missing manifest: " + path);

  LoadedCheckpoint ck;
  ck.manifest = nlohmann::json::parse(line, nullptr, false);
  if (ck.manifest.is_discarded() || !ck.manifest.contains("blocks"))
    throw ConfigError("checkpoint manifest invalid: " + path);

  for (const auto& b : ck.manifest["blocks"]) {
    const std::string name = b.at("name").get<std::string>();
    const Index rows = b.at("rows").get<Index>();
    const Index cols = b.at("cols").get<Index>();
    const std::string kind = b.at("kind").get<std::string>();
    if (kind == "f64") {
      Matrix m(rows, cols);
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
          double v = 0.0;
          in.read(reinterpret_cast<char*>(&v), sizeof(double));
          m(i, j) = v;
        }
      if (!in) throw ConfigError("checkpoint truncated: " + path);
      if (!m.allFinite())
        throw ConfigError("checkpoint block " + name + " has non-finite values");
      ck.f64_blocks.emplace_back(name, std::move(m));
    } else if (kind == "i32") {
      std::vector<int> v(static_cast<std::size_t>(rows));
      for (auto& x : v) {
        std::int32_t y = 0;
        in.read(reinterpret_cast<char*>(&y), sizeof(std::int32_t));
        x = y;
      }
      if (!in) throw ConfigError("checkpoint truncated: " + path);
      ck.i32_blocks.emplace_back(name, std::move(v));
    } else {
      throw ConfigError("unknown block kind in " + path);
    }
  }
  return ck;
}

const Matrix& LoadedCheckpoint::matrix(const std::string& name) const {
  for (const auto& [n, m] : f64_blocks)
    if (n == name) return m;
  throw ConfigError("checkpoint missing block: " + name);
}

const std::vector<int>& LoadedCheckpoint::ints(const std::string& name) const {
  for (const auto& [n, v] : i32_blocks)
    if (n == name) return v;
  throw ConfigError("checkpoint missing block: " + name);
}

bool artifacts_equal_ignoring_timestamp(const std::string& path_a,
                                        const std::string& path_b) {
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + p);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  std::string a = slurp(path_a);
  std::string b = slurp(path_b);

  const auto split_manifest = [](const std::string& s)
      -> std::pair<nlohmann::json, std::string> {
    const auto nl = s.find('\n');
    if (nl == std::string::npos) return {nlohmann::json(), s};
    auto j = nlohmann::json::parse(s.substr(0, nl), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return {nlohmann::json(), s};
    return {std::move(j), s.substr(nl + 1)};
  };

  auto [ja, rest_a] = split_manifest(a);
  auto [jb, rest_b] = split_manifest(b);
  if (ja.is_object() && jb.is_object()) {
    ja.erase("created_unix");
    jb.erase("created_unix");
    return ja == jb && rest_a == rest_b;
  }
  return a == b;
}

}  // namespace giant
