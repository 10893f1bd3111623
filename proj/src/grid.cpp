#include "nsk/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsk {

static bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Grid::Grid(int d_, int n_, double box_len_) : d(d_), n(n_), box_len(box_len_) {
    if (d != 2 && d != 3)
        throw std::invalid_argument("Grid: d must be 2 or 3, got " + std::to_string(d));
    if (n < 16 || !power_of_two(n))
        throw std::invalid_argument("Grid: n must be a power of two >= 16, got " + std::to_string(n));
    if (!(box_len > 0) || !std::isfinite(box_len))
        throw std::invalid_argument("Grid: box_len must be positive and finite");
}

double Grid::dxi() const { return 2.0 * std::numbers::pi / box_len; }

double Grid::lattice_measure() const { return std::pow(dxi(), d); }

double Grid::phys_measure() const { return lattice_measure() / static_cast<double>(total()); }

double Grid::xi_dealias() const { return dxi() * (n / 3.0); }

FreqTable::FreqTable(const Grid& g) : freq(g.n), freq2(g.n) {
    for (int i = 0; i < g.n; ++i) {
        freq[i] = g.freq(i);
        freq2[i] = freq[i] * freq[i];
    }
}

} // namespace nsk
