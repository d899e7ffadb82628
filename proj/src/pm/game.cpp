#include "spa/pm/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spa::pm {

const char* to_string(Model m) {
  switch (m) {
    case Model::FI: return "FI";
    case Model::MAB: return "MAB";
    case Model::PMLocal: return "PM-local";
  }
  return "?";
}

Model model_from_string(const std::string& s) {
  if (s == "FI") return Model::FI;
  if (s == "MAB") return Model::MAB;
  if (s == "PM-local") return Model::PMLocal;
  throw std::invalid_argument("unknown game model '" + s + "' (expected FI, MAB or PM-local)");
}

void PmGame::validate() const {
  using K = GameError::Kind;
  if (k < 2) throw GameError(K::Invalid, "game " + name + ": need k >= 2");
  if (d < 2) throw GameError(K::Invalid, "game " + name + ": need d >= 2");
  if (symbols.empty()) throw GameError(K::Invalid, "game " + name + ": empty alphabet");
  if (L.size() != k || Phi.size() != k) throw GameError(K::Invalid, "game " + name + ": expected k rows");
  for (std::size_t a = 0; a < k; ++a) {
    if (L[a].size() != d || Phi[a].size() != d) {
      throw GameError(K::Invalid, "game " + name + ": row " + std::to_string(a) + " needs d entries", {a});
    }
    for (std::size_t x = 0; x < d; ++x) {
      if (!(L[a][x] >= 0.0 && L[a][x] <= 1.0)) {
        throw GameError(K::Invalid, "game " + name + ": loss entry outside [0, 1]", {a});
      }
      if (Phi[a][x] < 0 || static_cast<std::size_t>(Phi[a][x]) >= symbols.size()) {
        throw GameError(K::Invalid, "game " + name + ": unknown feedback symbol", {a});
      }
    }
  }
}

std::vector<std::vector<int>> PmGame::row_symbols() const {
  std::vector<std::vector<int>> out(k);
  for (std::size_t a = 0; a < k; ++a) {
    out[a] = Phi[a];
    std::sort(out[a].begin(), out[a].end());
    out[a].erase(std::unique(out[a].begin(), out[a].end()), out[a].end());
  }
  return out;
}

std::size_t PmGame::m() const {
  std::size_t best = 0;
  for (const auto& r : row_symbols()) best = std::max(best, r.size());
  return best;
}

PmGame parse_game(const std::string& json_text) {
  using nlohmann::json;
  using K = GameError::Kind;
  PmGame g;
  try {
    const json j = json::parse(json_text);
    g.name = j.value("name", std::string("unnamed"));
    g.k = j.at("k").get<std::size_t>();
    g.d = j.at("d").get<std::size_t>();
    g.symbols = j.at("symbols").get<std::vector<std::string>>();
    g.L = j.at("L").get<std::vector<std::vector<double>>>();
    const auto phi = j.at("Phi").get<std::vector<std::vector<std::string>>>();
    for (const auto& row : phi) {
      std::vector<int> ids;
      for (const auto& s : row) {
        auto it = std::find(g.symbols.begin(), g.symbols.end(), s);
        if (it == g.symbols.end()) throw GameError(K::Invalid, "game " + g.name + ": symbol '" + s + "' not in alphabet");
        ids.push_back(static_cast<int>(it - g.symbols.begin()));
      }
      g.Phi.push_back(std::move(ids));
    }
    if (j.contains("model")) g.model = model_from_string(j.at("model").get<std::string>());
  } catch (const json::exception& e) {
    throw GameError(K::Invalid, std::string("game file: ") + e.what());
  }
  g.validate();
  return g;
}

PmGame load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GameError(GameError::Kind::Invalid, "cannot open game file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_game(os.str());
}

double model_B(Model model, const PmGame& game) {
  const double k = static_cast<double>(game.k);
  switch (model) {
    case Model::FI: return 0.5;
    case Model::MAB: return k / 2.0;
    case Model::PMLocal: return 2.0 * static_cast<double>(game.m()) * k * k;
  }
  return 0.0;
}

double model_Vbar(Model model, const PmGame& game) {
  const double k = static_cast<double>(game.k);
  const double m = static_cast<double>(game.m());
  switch (model) {
    case Model::FI: return 0.5;
    case Model::MAB: return k / 2.0;
    case Model::PMLocal: return 3.0 * m * m * k * k * k;
  }
  return 0.0;
}

}  // namespace spa::pm
