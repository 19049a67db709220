#include <doctest.h>

#include "treegen/tree.hpp"

#include <sstream>

using namespace treegen;

namespace {
LabeledTree small_tree() { return LabeledTree({0, 3, 2, 2, 4, 4}, {-1, 0, 1, 1, 3, 1}, 5); }
}  // namespace

TEST_CASE("euler string of the five-edge example tree") {
    auto e = encode_euler(small_tree());
    CHECK(e.symbols == std::vector<std::int64_t>{3, 2, 7, 2, 4, 9, 7, 4, 9, 8});
    CHECK(decode_euler(e.symbols, 5) == small_tree());
}

TEST_CASE("single edge and empty strings") {
    LabeledTree one({0, 4}, {-1, 0}, 6);
    CHECK(encode_euler(one).symbols == std::vector<std::int64_t>{4, 10});
    auto root = decode_euler({}, 5);
    CHECK(root.n() == 0);
    CHECK(encode_euler(root).symbols.empty());
}

TEST_CASE("star decodes with children in order") {
    auto u = decode_euler({2, 7, 4, 9, 4, 9}, 5);
    CHECK(u.n() == 3);
    CHECK(u.children(0) == std::vector<int>{1, 2, 3});
    CHECK(u.labels() == std::vector<int>{0, 2, 4, 4});
}

TEST_CASE("validation reports the first violation") {
    auto d = validate_euler({3, 9}, 5);
    CHECK_FALSE(d.ok);
    CHECK(d.kind == EulerErrorKind::MismatchedPair);
    CHECK(d.position == 2);
    CHECK(validate_euler({3, 8}, 5).ok);
    d = validate_euler({7, 2}, 5);
    CHECK(d.kind == EulerErrorKind::Unbalanced);
    CHECK(d.position == 1);
    d = validate_euler({3, 11}, 5);
    CHECK(d.kind == EulerErrorKind::BadSymbol);
    d = validate_euler({3, 2, 7}, 5);
    CHECK(d.kind == EulerErrorKind::Unbalanced);
    CHECK_THROWS_AS(decode_euler({0}, 5), EulerError);
}

TEST_CASE("random trees round-trip through the euler string") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        int n = static_cast<int>(rng() % 13);
        auto t = random_tree(n, 4, rng);
        auto e = encode_euler(t);
        CHECK(e.symbols.size() == static_cast<std::size_t>(2 * n));
        CHECK(validate_euler(e.symbols, 4).ok);
        CHECK(decode_euler(e.symbols, 4) == t);
    }
}

TEST_CASE("tree constructor rejects malformed input") {
    CHECK_THROWS_AS(LabeledTree({0, 1, 1}, {-1, 0, 2}, 3), TreeError);  // parent after child
    CHECK_THROWS_AS(LabeledTree({0, 4}, {-1, 0}, 3), TreeError);         // label out of range
    CHECK_THROWS_AS(LabeledTree({1, 1}, {-1, 0}, 3), TreeError);         // root label
    // 0 -> 1 -> 2, then 3 under 1 is fine, then 4 under 2 breaks preorder
    CHECK_THROWS_AS(LabeledTree({0, 1, 1, 1, 1}, {-1, 0, 1, 1, 2}, 3), TreeError);
}

TEST_CASE("edge positions") {
    auto p = edge_positions(small_tree());
    CHECK(p.inward == std::vector<int>{0, 1, 2, 4, 5, 8});
    CHECK(p.outward == std::vector<int>{11, 10, 3, 7, 6, 9});
}

TEST_CASE("text format round trip") {
    std::istringstream in("6\n0 3 2 2 4 4\n-1 0 1 1 3 1\n5\n");
    auto t = read_tree(in);
    CHECK(t == small_tree());
    CHECK(t.m() == 5);
    std::istringstream again(write_tree(t));
    CHECK(read_tree(again) == t);
    std::istringstream bad("3\n0 1\n-1 0 0\n");
    CHECK_THROWS_AS(read_tree(bad), TreeError);
}

TEST_CASE("symbol lists") {
    CHECK(parse_symbols("2,7,4,9,B,B", 100) == std::vector<std::int64_t>{2, 7, 4, 9, 100, 100});
    CHECK(format_symbols({2, 7, 100}, 100) == "2,7,B");
    CHECK(parse_symbols("") .empty());
    CHECK_THROWS(parse_symbols("1,,2"));
    CHECK_THROWS(parse_symbols("B"));
}

TEST_CASE("from_children renumbers into preorder") {
    // vertex ids scrambled: root 3 with children 0 then 2; 2 has child 1
    std::vector<int> labels{5, 2, 1, 0};
    std::vector<std::vector<int>> kids{{}, {}, {1}, {0, 2}};
    auto t = LabeledTree::from_children(labels, kids, 3, 5);
    CHECK(t.labels() == std::vector<int>{0, 5, 1, 2});
    CHECK(t.parents() == std::vector<int>{-1, 0, 0, 2});
}
