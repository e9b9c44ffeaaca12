#include <doctest.h>

#include <random>

#include "freeprod/element.hpp"
#include "freeprod/finite_dim.hpp"
#include "freeprod/random_elements.hpp"
#include "freeprod/triple_shape.hpp"

using namespace freeprod;
using CD = std::complex<double>;
using EC = ExactComplex;

namespace {

FreeProduct<EC> make_f2() {
    return FreeProduct<EC>({make_integer_algebra<EC>("A"), make_integer_algebra<EC>("B")});
}

FreeProduct<EC> make_z2z3() {
    return FreeProduct<EC>({make_cyclic_algebra<EC>("Z2", 2), make_cyclic_algebra<EC>("Z3", 3)});
}

FreeProduct<CD> make_m2z() {
    return FreeProduct<CD>(
        {gram_schmidt_onb("M2", matrix_algebra_spec(2)), make_integer_algebra<CD>("Z")});
}

template <class S>
Element<S> word_el(std::initializer_list<Letter> letters) {
    return Element<S>::single(Word(letters));
}

// Exhaustive reduced words of block length exactly n over a finite family.
template <class S>
void enumerate_words(const FreeProduct<S>& fp, int n, std::vector<Word>& out) {
    std::vector<Word> frontier{Word{}};
    for (int step = 0; step < n; ++step) {
        std::vector<Word> next;
        for (const Word& w : frontier)
            for (std::uint32_t f = 0; f < fp.factor_count(); ++f) {
                if (!w.empty() && w.back().factor == f) continue;
                for (std::int64_t label : fp.factor(f).sample_labels(2)) {
                    Word ext = w;
                    ext.push_back(Letter{f, label});
                    next.push_back(std::move(ext));
                }
            }
        frontier = std::move(next);
    }
    out.insert(out.end(), frontier.begin(), frontier.end());
}

double element_distance(const Element<CD>& a, const Element<CD>& b) {
    double worst = 0.0;
    Element<CD> diff = a - b;
    for (const auto& [w, c] : diff.terms()) worst = std::max(worst, std::abs(c));
    return worst;
}

}  // namespace

TEST_CASE("group cancellation in the free group") {
    auto fp = make_f2();
    auto prod = fp.multiply(word_el<EC>({{0, 1}}), word_el<EC>({{0, -1}}));
    CHECK(prod == Element<EC>::unit());
}

TEST_CASE("telescoping product over Z2 * Z3") {
    auto fp = make_z2z3();
    // (x y)(y^2 x) = 1: y y^2 = e, then x x = e
    auto left = word_el<EC>({{0, 1}, {1, 1}});
    auto right = word_el<EC>({{1, 2}, {0, 1}});
    CHECK(fp.multiply(left, right) == Element<EC>::unit());
    // trace of the product is 1
    CHECK(trace(fp.multiply(left, right)) == EC(1));

    // (x y)(y x) = x y^2 x, one reduced word of length 3
    auto mid = fp.multiply(left, word_el<EC>({{1, 1}, {0, 1}}));
    Element<EC> expect = word_el<EC>({{0, 1}, {1, 2}, {0, 1}});
    CHECK(mid == expect);
}

TEST_CASE("adjoint reverses and stars group words") {
    auto fp = make_f2();
    auto ab = word_el<EC>({{0, 1}, {1, 1}});
    Element<EC> expect = word_el<EC>({{1, -1}, {0, -1}});
    CHECK(fp.adjoint(ab) == expect);
}

TEST_CASE("adjoint is an involution on random elements") {
    auto fp = make_z2z3();
    std::mt19937_64 rng(7);
    for (int t = 0; t < 30; ++t) {
        Element<EC> a = random_element(fp, rng, {.max_level = 4, .max_terms = 5});
        CHECK(fp.adjoint(fp.adjoint(a)) == a);
    }
}

TEST_CASE("adjoint across a matrix factor") {
    auto fp = make_m2z();
    // u = diag(1,-1) is self-adjoint, so (u g)* = g^{-1} u
    auto ug = word_el<CD>({{0, 1}, {1, 1}});
    Element<CD> expect = word_el<CD>({{1, -1}, {0, 1}});
    CHECK(element_distance(fp.adjoint(ug), expect) <= 1e-12);

    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        Element<CD> a = random_element(fp, rng, {.max_level = 3, .max_terms = 4});
        CHECK(element_distance(fp.adjoint(fp.adjoint(a)), a) <= 1e-11);
    }
}

TEST_CASE("inner products use word orthonormality") {
    auto fp = make_f2();
    auto a = word_el<EC>({{0, 1}}) + word_el<EC>({{1, 1}});
    CHECK(inner_product(a, a) == EC(2));
    CHECK(two_norm(a) == doctest::Approx(std::sqrt(2.0)));
    CHECK(inner_product(word_el<EC>({{0, 1}}), word_el<EC>({{0, 2}})) == EC(0));
    CHECK(inner_product(word_el<EC>({{0, 1}}), Element<EC>::unit()) == EC(0));
}

TEST_CASE("level projection") {
    auto fp = make_f2();
    auto a = Element<EC>::unit() + word_el<EC>({{0, 1}});
    CHECK(project_level(a, 0) == Element<EC>::unit());
    CHECK(project_level(a, 1) == word_el<EC>({{0, 1}}));
    CHECK(project_level(a, 5).is_zero());

    auto z = make_z2z3();
    auto prod = z.multiply(word_el<EC>({{0, 1}, {1, 1}}), word_el<EC>({{1, 2}, {0, 1}}));
    CHECK(project_level(prod, 0) == Element<EC>::unit());
}

TEST_CASE("closed-form level components of word products") {
    auto fp = make_z2z3();
    const Word xy{{0, 1}, {1, 1}};
    const Word y2x{{1, 2}, {0, 1}};

    // boundary letters in different factors: the product stays reduced
    Element<EC> full = fp.word_product_level(xy, xy, 4);
    CHECK(full == Element<EC>::single(Word{{0, 1}, {1, 1}, {0, 1}, {1, 1}}));
    for (int n = 0; n <= 6; ++n)
        if (n != 4) CHECK(fp.word_product_level(xy, xy, n).is_zero());

    // full contraction down to the unit
    Element<EC> unit_part = fp.word_product_level(xy, y2x, 0);
    CHECK(unit_part == Element<EC>::unit());

    // the middle level vanishes because the contraction is total
    CHECK(fp.word_product_level(xy, y2x, 2).is_zero());
}

TEST_CASE("closed form equals multiply + project: exhaustive over Z2 * Z3") {
    auto fp = make_z2z3();
    std::vector<Word> words;
    for (int n = 0; n <= 3; ++n) enumerate_words(fp, n, words);
    REQUIRE(words.size() == 14);
    for (const Word& v : words)
        for (const Word& w : words) {
            Element<EC> product = fp.multiply_words(v, w);
            for (int n = 0; n <= 6; ++n)
                CHECK(fp.word_product_level(v, w, n) == project_level(product, n));
        }
}

TEST_CASE("closed form equals multiply + project: sampled over M2 * Z") {
    auto fp = make_m2z();
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> lvl(0, 3);
    for (int t = 0; t < 150; ++t) {
        Word v = random_reduced_word(fp, rng, lvl(rng));
        Word w = random_reduced_word(fp, rng, lvl(rng));
        Element<CD> product = fp.multiply_words(v, w);
        for (int n = 0; n <= 6; ++n)
            CHECK(element_distance(fp.word_product_level(v, w, n), project_level(product, n)) <=
                  1e-12);
    }
}

TEST_CASE("support profiles and the support constant") {
    auto fp = make_f2();
    auto a = word_el<EC>({{0, 1}}) + word_el<EC>({{1, 1}});
    SupportProfile<EC> prof = fp.support_profile(a);
    CHECK(prof.letters.at(0) == std::set<std::int64_t>{1});
    CHECK(prof.letters.at(1) == std::set<std::int64_t>{1});
    CHECK(prof.k_constant_sq == Rational(1));
    CHECK(prof.max_level == 1);

    auto b = word_el<EC>({{0, 1}}) + word_el<EC>({{0, 2}});
    CHECK(fp.support_profile(b).k_constant_sq == Rational(2));
    CHECK(fp.support_profile(b).k_constant == doctest::Approx(std::sqrt(2.0)));

    // single word: per-factor sums over its letters
    auto w = word_el<EC>({{0, 1}, {1, 2}, {0, -1}});
    CHECK(fp.support_profile(w).k_constant_sq == Rational(2));

    CHECK_THROWS_AS(fp.support_profile(Element<EC>::zero()), std::domain_error);
    CHECK(fp.support_constant(Element<EC>::unit()) == 1.0);  // letterless convention
}

TEST_CASE("level bound for products of homogeneous elements") {
    auto fp = make_z2z3();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> lvl(1, 3);
    for (int t = 0; t < 60; ++t) {
        const int k = lvl(rng), l = lvl(rng);
        Element<EC> a = random_element(fp, rng, {.max_level = k, .max_terms = 4, .homogeneous = true});
        Element<EC> b = random_element(fp, rng, {.max_level = l, .max_terms = 4, .homogeneous = true});
        Element<EC> ab = fp.multiply(a, b);
        const double a2 = two_norm(a), b2 = two_norm(b);
        const double k_const = fp.support_constant(a);
        for (int n = 0; n <= k + l + 1; ++n) {
            Element<EC> en = project_level(ab, n);
            if (n < std::abs(k - l) || n > k + l) {
                CHECK(en.is_zero());
                continue;
            }
            const double lhs = two_norm(en);
            const double factor = ((k + l - n) % 2 == 0) ? 1.0 : k_const;
            CHECK(lhs <= factor * a2 * b2 + 1e-9);
        }
    }
}

TEST_CASE("triple products decompose into shaped words plus junction terms") {
    auto fp = make_z2z3();
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> small(0, 2);
    for (int checked = 0; checked < 60; ++checked) {
        const int s = small(rng);
        const int r = s + 1 + small(rng);
        const int t = s + 1 + small(rng);
        Word v = random_reduced_word(fp, rng, r);
        Word w = random_reduced_word(fp, rng, s);
        Word z = random_reduced_word(fp, rng, t);
        TripleShape<EC> shape = triple_word_shape(fp, v, w, z);
        // shaped words keep the outer prefix of v and suffix of z
        for (const auto& [q, c] : shape.shaped.terms()) {
            CHECK(common_prefix(q, v) >= r - s);
            CHECK(common_suffix(q, z) >= t - s);
        }
        // junction terms never eat deeper than s letters on either side
        for (const auto& j : shape.junctions) {
            CHECK(j.keep_prefix >= r - s);
            CHECK(j.keep_suffix >= t - s);
        }
        // the decomposition reproduces the product exactly
        Element<EC> vwz = fp.multiply(fp.multiply_words(v, w), Element<EC>::single(z));
        CHECK(shape.expand(fp, v, z) == vwz);
    }
}

TEST_CASE("a collapsing triple is carried by its junction term") {
    auto fp = make_z2z3();
    // (x y)(y)(y x) = 1: the reduced support keeps nothing of v or z, and the
    // decomposition accounts for it through the junction product.
    Word v{{0, 1}, {1, 1}}, w{{1, 1}}, z{{1, 1}, {0, 1}};
    Element<EC> vwz = fp.multiply(fp.multiply_words(v, w), Element<EC>::single(z));
    CHECK(vwz == Element<EC>::unit());
    TripleShape<EC> shape = triple_word_shape(fp, v, w, z);
    CHECK(shape.shaped.is_zero());
    REQUIRE(shape.junctions.size() == 1);
    CHECK(shape.junctions[0].keep_prefix == 1);
    CHECK(shape.junctions[0].keep_suffix == 1);
    CHECK(shape.expand(fp, v, z) == vwz);
}

TEST_CASE("parseval over levels") {
    auto fp = make_z2z3();
    std::mt19937_64 rng(404);
    for (int t = 0; t < 20; ++t) {
        Element<EC> a = random_element(fp, rng, {.max_level = 4, .max_terms = 6});
        Rational sum{};
        for (int n = 0; n <= a.max_level(); ++n) sum += norm_sq(project_level(a, n));
        CHECK(sum == norm_sq(a));
    }
}

TEST_CASE("associativity and star anti-homomorphism") {
    auto fp = make_z2z3();
    std::mt19937_64 rng(505);
    for (int t = 0; t < 25; ++t) {
        Element<EC> a = random_element(fp, rng, {.max_level = 3, .max_terms = 3});
        Element<EC> b = random_element(fp, rng, {.max_level = 3, .max_terms = 3});
        Element<EC> c = random_element(fp, rng, {.max_level = 3, .max_terms = 3});
        CHECK(fp.multiply(fp.multiply(a, b), c) == fp.multiply(a, fp.multiply(b, c)));
        CHECK(fp.adjoint(fp.multiply(a, b)) == fp.multiply(fp.adjoint(b), fp.adjoint(a)));
    }
}

TEST_CASE("associativity across a matrix factor") {
    auto fp = make_m2z();
    std::mt19937_64 rng(606);
    for (int t = 0; t < 15; ++t) {
        Element<CD> a = random_element(fp, rng, {.max_level = 2, .max_terms = 3});
        Element<CD> b = random_element(fp, rng, {.max_level = 2, .max_terms = 3});
        Element<CD> c = random_element(fp, rng, {.max_level = 2, .max_terms = 3});
        CHECK(element_distance(fp.multiply(fp.multiply(a, b), c), fp.multiply(a, fp.multiply(b, c))) <=
              1e-10);
        CHECK(element_distance(fp.adjoint(fp.multiply(a, b)),
                               fp.multiply(fp.adjoint(b), fp.adjoint(a))) <= 1e-10);
    }
}

TEST_CASE("family guards") {
    auto fp = make_f2();
    CHECK_THROWS_AS(fp.check_word(Word{{0, 1}, {0, 1}}), std::invalid_argument);  // not alternating
    CHECK_THROWS_AS(fp.check_word(Word{{0, 0}}), std::invalid_argument);          // unit label
    CHECK_THROWS_AS(fp.factor(9), std::invalid_argument);
    CHECK(fp.index_of("A").value() == 0);
    CHECK(!fp.index_of("nope").has_value());
    CHECK_THROWS_AS(FreeProduct<EC>({make_integer_algebra<EC>("A")}), std::invalid_argument);
}

TEST_CASE("triple decomposition, exhaustive over small shapes") {
    auto fp = make_z2z3();
    std::vector<Word> outer, middle;
    for (int n = 2; n <= 3; ++n) enumerate_words(fp, n, outer);
    for (int n = 0; n <= 2; ++n) enumerate_words(fp, n, middle);
    int checked = 0;
    for (const Word& v : outer)
        for (const Word& w : middle) {
            if (block_length(w) >= block_length(v)) continue;
            for (const Word& z : outer) {
                if (block_length(w) >= block_length(z)) continue;
                TripleShape<EC> shape = triple_word_shape(fp, v, w, z);
                Element<EC> product = fp.multiply(fp.multiply_words(v, w), Element<EC>::single(z));
                REQUIRE(shape.expand(fp, v, z) == product);
                const int r = block_length(v), s = block_length(w), t = block_length(z);
                for (const auto& [q, c] : shape.shaped.terms()) {
                    REQUIRE(common_prefix(q, v) >= r - s);
                    REQUIRE(common_suffix(q, z) >= t - s);
                }
                for (const auto& j : shape.junctions) {
                    REQUIRE(j.keep_prefix >= r - s);
                    REQUIRE(j.keep_suffix >= t - s);
                }
                ++checked;
            }
        }
    CHECK(checked > 500);
}

TEST_CASE("closed form matches multiplication over three factors") {
    FreeProduct<EC> fp({make_integer_algebra<EC>("A"), make_cyclic_algebra<EC>("C2", 2),
                        make_cyclic_algebra<EC>("C3", 3)});
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> lvl(0, 3);
    for (int t = 0; t < 200; ++t) {
        Word v = random_reduced_word(fp, rng, lvl(rng));
        Word w = random_reduced_word(fp, rng, lvl(rng));
        Element<EC> product = fp.multiply_words(v, w);
        for (int n = 0; n <= 6; ++n)
            CHECK(fp.word_product_level(v, w, n) == project_level(product, n));
    }
}
