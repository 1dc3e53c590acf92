#include "csaddle/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace csaddle {

void save_field(const Field& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_field: cannot open " + path);
  const Grid& g = f.grid();
  out << "# field dim=" << g.dim() << " n=" << g.cells(0);
  if (g.dim() == 2) out << "," << g.cells(1);
  out << " extent=";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", g.extent(0));
  out << buf;
  if (g.dim() == 2) {
    std::snprintf(buf, sizeof buf, "%.17g", g.extent(1));
    out << "," << buf;
  }
  out << " bc=" << to_string(g.bc()) << "\n";
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f[i]);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("save_field: write failed for " + path);
}

namespace {
std::string expect_kv(std::istringstream& in, const std::string& key, const std::string& path) {
  std::string tok;
  if (!(in >> tok) || tok.rfind(key + "=", 0) != 0)
    throw std::runtime_error("load_field: malformed header in " + path + " (expected " + key + "=...)");
  return tok.substr(key.size() + 1);
}
}  // namespace

Field load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_field: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string tok;
  hs >> tok;  // '#'
  hs >> tok;  // 'field'
  if (tok != "field") throw std::runtime_error("load_field: not a field file: " + path);

  const int dim = std::stoi(expect_kv(hs, "dim", path));
  const std::string nstr = expect_kv(hs, "n", path);
  const std::string estr = expect_kv(hs, "extent", path);
  const std::string bcstr = expect_kv(hs, "bc", path);

  auto split2 = [&](const std::string& s, auto conv) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return std::pair{conv(s), conv(s)};
    return std::pair{conv(s.substr(0, comma)), conv(s.substr(comma + 1))};
  };
  auto [nx, ny] = split2(nstr, [](const std::string& s) { return std::stoi(s); });
  auto [lx, ly] = split2(estr, [](const std::string& s) { return std::stod(s); });
  Bc bc;
  if (bcstr == "neumann") bc = Bc::Neumann;
  else if (bcstr == "periodic") bc = Bc::Periodic;
  else throw std::runtime_error("load_field: unknown bc '" + bcstr + "' in " + path);

  GridPtr grid = (dim == 1) ? Grid::line(nx, lx, bc) : Grid::box(nx, ny, lx, ly, bc);
  Eigen::ArrayXd values(grid->size());
  for (int i = 0; i < grid->size(); ++i) {
    if (!(in >> values[i]))
      throw std::runtime_error("load_field: expected " + std::to_string(grid->size()) +
                               " values in " + path + ", got " + std::to_string(i));
  }
  return Field(grid, std::move(values));
}

}  // namespace csaddle
