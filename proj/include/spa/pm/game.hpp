#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spa::pm {

enum class Model { FI, MAB, PMLocal };

const char* to_string(Model m);
Model model_from_string(const std::string& s);

// Loss matrix L in [0,1]^{k x d} and feedback matrix Phi over a finite
// alphabet, stored as symbol ids.
struct PmGame {
  std::string name;
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<std::string> symbols;
  std::vector<std::vector<double>> L;
  std::vector<std::vector<int>> Phi;
  std::optional<Model> model;

  // Shapes, loss range and symbol ids. Throws GameError.
  void validate() const;
  // Largest number of distinct symbols in one row.
  std::size_t m() const;
  // Sorted distinct symbol ids of each row.
  std::vector<std::vector<int>> row_symbols() const;
  std::size_t alphabet_size() const { return symbols.size(); }
};

class GameError : public std::runtime_error {
 public:
  enum class Kind { Invalid, DegenerateGame, DuplicateActions, NotLocallyObservable, Disconnected };
  GameError(Kind kind, const std::string& what, std::vector<std::size_t> actions = {})
      : std::runtime_error(what), kind_(kind), actions_(std::move(actions)) {}
  Kind kind() const { return kind_; }
  const std::vector<std::size_t>& actions() const { return actions_; }

 private:
  Kind kind_;
  std::vector<std::size_t> actions_;
};

// JSON game file:
//   {"name": ..., "k": 2, "d": 2, "symbols": ["a", "b"],
//    "L": [[0, 1], [1, 0]], "Phi": [["a", "b"], ["a", "b"]], "model": "FI"}
PmGame parse_game(const std::string& json_text);
PmGame load_game(const std::filesystem::path& path);

// Constants of the model: B for the initial rate, Vbar for the per-round
// optimization value.
double model_B(Model model, const PmGame& game);
double model_Vbar(Model model, const PmGame& game);

}  // namespace spa::pm
