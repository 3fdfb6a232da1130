// Frozen oracle values shared by the solver tests and the acceptance run.
#ifndef DEPMARK_TESTS_FIXTURES_HPP
#define DEPMARK_TESTS_FIXTURES_HPP

#include <array>

namespace depmark::test {

// Fixtures iterated by hand in exact rational arithmetic
// (tests/oracles/freeze_fixtures.py), rounded once to double.
inline constexpr std::array<std::array<double, 7>, 3> kPrintedFromP1 = {{
    {0.99999703, 0.0, 0.0, 0.0, 0.0, 0.0, 3.3e-07},
    {0.9999940600088209, 0.0, 0.0, 0.0, 0.0, 0.0, 6.599990199e-07},
    {0.9999910900264627, 0.0, 0.0, 0.0, 0.0, 0.0, 9.89997059702911e-07},
}};
inline constexpr std::array<double, 3> kPrintedFromP1Defect = {2.64e-06, 5.2799921592e-06,
                                                        7.919976477623288e-06};
inline constexpr std::array<std::array<double, 7>, 3> kPrintedUniformHalfHour = {{
    {0.1438489942063492, 0.14394820055555554, 0.14107142857142857, 0.14384907777777778,
     0.1419642857142857, 0.14285748357142858, 0.14285724214285714},
    {0.1448484208722286, 0.1450076359358309, 0.1393080399862921, 0.14483481140884588,
     0.14107701062488429, 0.14285782083035714, 0.14285734148751633},
    {0.14585520324410023, 0.1460359567635911, 0.13756669795036344, 0.1458143825201884,
     0.14019528269049947, 0.14285815467210608, 0.1428574408907745},
}};

/// mpmath expm at 50 digits, C = 0.9, t = 4380, start in state 1.
inline constexpr std::array<double, 7> kFeedwater4380 = {
    0.99834213549709515, 0.00021348547737518075, 2.2823426960199518e-8, 0.0, 0.0,
    2.897850613294255e-10, 0.0014443559123176437};

}  // namespace depmark::test

#endif  // DEPMARK_TESTS_FIXTURES_HPP
