#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dicat/dicat_data.hpp"
#include "dicat/oracle.hpp"

namespace dicat {

// A finite group with a normalized 3-cochain valued in n-th roots of unity,
// stored as exact exponents. The horizontal associator of the induced
// instance is the cochain; its pentagon is the cocycle condition.
struct CocycleInstance {
    std::vector<std::vector<int>> group;  // multiplication table g*h
    int unit = 0;
    int root_order = 1;
    // omega[g][h][k] = exponent of the root of unity
    std::vector<std::vector<std::vector<int>>> omega;
    // deliberately modified entries; normalization is not enforced on these
    std::vector<std::array<int, 3>> tampered;
    std::string label = "cocycle";

    int mul(int g, int h) const { return group[g][h]; }
    std::size_t order() const { return group.size(); }
};

struct GroupCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

GroupCheck validate_group(const CocycleInstance& c);

// All quadruples where d(omega) != 1, evaluated exactly:
//   omega(h,k,l) + omega(g,h*k,l) + omega(g,h,k)  ==  omega(g*h,k,l) + omega(g,h,k*l)
std::vector<std::array<int, 4>> cocycle_condition(const CocycleInstance& c);

CocycleInstance z2_instance(bool nontrivial);
CocycleInstance zn_instance(int n, int omega_exponent);  // omega = zeta^(e*i*j*k) style cochain

// Applies exponent tampering at the listed triples (adds half the root order,
// i.e. multiplies by -1 for even orders).
void tamper(CocycleInstance& c, const std::vector<std::array<int, 3>>& triples);

DicatData build_cocycle_instance(const CocycleInstance& c);

}  // namespace dicat
