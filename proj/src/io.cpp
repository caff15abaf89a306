#include "nplap/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nplap {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

}  // namespace

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_solution(const ScalarField& u, const std::filesystem::path& stem) {
  const Grid& g = u.grid();
  const auto bin = with_ext(stem, ".bin");
  if (bin.has_parent_path()) std::filesystem::create_directories(bin.parent_path());
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw IoError("cannot write " + bin.string());
  for (double v : u.values()) {
    const std::uint64_t w = to_little(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&w), sizeof w);
  }
  if (!out) throw IoError("write failed for " + bin.string());

  std::vector<int> extent;
  for (int a = 0; a < g.dim(); ++a) extent.push_back(g.extent(a));
  const Vec& o = g.origin();
  const Vec& c = g.domain().center;
  nlohmann::json meta = {{"schema_version", kSchemaVersion},
                         {"dtype", "float64-le"},
                         {"layout", "row-major, last axis fastest"},
                         {"tag", u.tag()},
                         {"dim", g.dim()},
                         {"h", g.spacing()},
                         {"origin", std::vector<double>(o.data(), o.data() + o.size())},
                         {"extent", extent},
                         {"center", std::vector<double>(c.data(), c.data() + c.size())},
                         {"radius", g.domain().radius},
                         {"count", u.size()},
                         {"data", bin.filename().string()}};
  write_text(with_ext(stem, ".json"), dump_json(meta));
}

ScalarField read_solution(const std::filesystem::path& stem) {
  const nlohmann::json meta = read_json(with_ext(stem, ".json"));
  try {
    if (meta.at("schema_version").get<int>() != kSchemaVersion)
      throw IoError("unsupported solution schema_version");
    if (meta.at("dtype").get<std::string>() != "float64-le")
      throw IoError("unsupported solution dtype");
    const int dim = meta.at("dim").get<int>();
    const double h = meta.at("h").get<double>();
    const auto origin = meta.at("origin").get<std::vector<double>>();
    const auto center = meta.at("center").get<std::vector<double>>();
    const auto extent = meta.at("extent").get<std::vector<int>>();
    const double radius = meta.at("radius").get<double>();
    const std::size_t count = meta.at("count").get<std::size_t>();
    if (dim < 1 || dim > kMaxDim || static_cast<int>(origin.size()) != dim ||
        static_cast<int>(center.size()) != dim)
      throw IoError("inconsistent solution metadata");
    Vec o(dim), c(dim);
    for (int a = 0; a < dim; ++a) {
      o[a] = origin[static_cast<std::size_t>(a)];
      c[a] = center[static_cast<std::size_t>(a)];
    }
    GridPtr grid = grid_from_layout(dim, h, o, extent, Ball{c, radius});
    if (grid->node_count() != count) throw IoError("solution count does not match layout");

    const auto bin = with_ext(stem, ".bin");
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw IoError("cannot read " + bin.string());
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t w = 0;
      in.read(reinterpret_cast<char*>(&w), sizeof w);
      if (!in) throw IoError("truncated solution data in " + bin.string());
      values[i] = std::bit_cast<double>(to_little(w));
    }
    if (in.peek() != std::char_traits<char>::eof())
      throw IoError("trailing bytes in " + bin.string());
    return ScalarField(grid, std::move(values), meta.value("tag", std::string("u")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed solution metadata: " + std::string(e.what()));
  }
}

nlohmann::json to_json(const SolveReport& rep) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& s : rep.history) hist.push_back({s.iter, s.residual, s.dt});
  return {{"schema_version", kSchemaVersion},
          {"iterations", rep.iterations},
          {"final_residual", rep.final_residual},
          {"converged", rep.converged},
          {"flagged", rep.flagged},
          {"damping", rep.damping},
          {"grad_floor", rep.grad_floor},
          {"eps_grad", rep.eps_grad},
          {"history_columns", {"iter", "residual", "dt"}},
          {"history", hist}};
}

std::string iteration_log(const SolveReport& rep) {
  std::string out;
  char buf[96];
  for (const auto& s : rep.history) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", s.iter, s.residual, s.dt);
    out += buf;
  }
  return out;
}

}  // namespace nplap
