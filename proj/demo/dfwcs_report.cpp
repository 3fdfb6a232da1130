// Coverage sweep of the bundled feed-water model, printed next to the
// published figures.
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "depmark/depmark.hpp"

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : DEPMARK_MODELS_DIR;
  std::ifstream in(dir + "/dfwcs.mdl");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  auto model = depmark::parse(text);

  struct Published {
    double c, R, Pfu;
  };
  const Published published[] = {{0.90, 0.98832, 0.01311},   {0.92, 0.98949, 0.01050},
                                 {0.94, 0.99201, 0.00788},   {0.95, 0.99330, 0.006578},
                                 {0.96, 0.99473, 0.005266},  {0.98, 0.99734, 0.002636},
                                 {0.99, 0.99866, 0.001319},  {0.999, 0.999849, 0.000131},
                                 {1.0, 0.999981, 0.0}};
  std::vector<double> values;
  for (const auto& p : published) values.push_back(p.c);
  auto rows = depmark::sweep(model, "C", values, depmark::kSixMonthsHours, {});

  std::printf("%-7s %-12s %-12s %-12s %-12s\n", "C", "R", "R(pub)", "Pfu", "Pfu(pub)");
  for (std::size_t k = 0; k < rows.size(); ++k)
    std::printf("%-7.3f %-12.8f %-12.6f %-12.4e %-12.4e\n", rows[k].value, rows[k].metrics.R,
                published[k].R, rows[k].metrics.Pfu, published[k].Pfu);
  return 0;
}
