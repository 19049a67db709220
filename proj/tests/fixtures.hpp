#ifndef TREEGEN_TEST_FIXTURES_HPP
#define TREEGEN_TEST_FIXTURES_HPP

#include "treegen/rational.hpp"
#include "treegen/tree.hpp"

#include <cstdint>
#include <vector>

namespace fixtures {

// Root with children 1 (label 3, subtree 2,3,4), 5 (label 4); 3 has child 4.
inline treegen::LabeledTree small_tree(int m = 5) {
    return treegen::LabeledTree({0, 3, 2, 2, 4, 4}, {-1, 0, 1, 1, 3, 1}, m);
}

inline std::vector<treegen::Rational> rats(const std::vector<std::int64_t>& xs) {
    std::vector<treegen::Rational> v;
    for (auto x : xs) v.emplace_back(x);
    return v;
}

inline std::vector<treegen::Rational> ints(std::initializer_list<long long> xs) {
    std::vector<treegen::Rational> v;
    for (auto x : xs) v.emplace_back(x);
    return v;
}

inline std::vector<std::int64_t> to_ints(const std::vector<treegen::Rational>& v) {
    std::vector<std::int64_t> out;
    for (const auto& r : v) out.push_back(r.to_int64().value());
    return out;
}

}  // namespace fixtures

#endif
