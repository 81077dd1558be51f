#pragma once

// Sobol direction numbers for dimensions 2..32.
//
// Source: S. Joe and F. Y. Kuo, "new-joe-kuo-6.21201", the direction-number
// file published at https://web.maths.unsw.edu.au/~fkuo/sobol/ (search
// criterion D(6), 21201 dimensions). Only the first 32 dimensions are kept.
// Columns: degree s of the primitive polynomial, its interior coefficient
// bits a (leading and trailing 1 omitted), and the initial odd integers
// m_1..m_s. Dimension 1 is the van der Corput sequence in base 2 and has no
// entry.

#include <array>
#include <cstdint>

namespace qmcdl::detail {

struct SobolPolynomial {
    std::uint32_t degree;
    std::uint32_t coefficients;
    std::array<std::uint32_t, 8> initial;
};

inline constexpr std::size_t kSobolMaxDim = 32;

inline constexpr std::array<SobolPolynomial, kSobolMaxDim - 1> kSobolTable{{
    {1, 0, {1}},  // dim 2
    {2, 1, {1, 3}},  // dim 3
    {3, 1, {1, 3, 1}},  // dim 4
    {3, 2, {1, 1, 1}},  // dim 5
    {4, 1, {1, 1, 3, 3}},  // dim 6
    {4, 4, {1, 3, 5, 13}},  // dim 7
    {5, 2, {1, 1, 5, 5, 17}},  // dim 8
    {5, 4, {1, 1, 5, 5, 5}},  // dim 9
    {5, 7, {1, 1, 7, 11, 19}},  // dim 10
    {5, 11, {1, 1, 5, 1, 1}},  // dim 11
    {5, 13, {1, 1, 1, 3, 11}},  // dim 12
    {5, 14, {1, 3, 5, 5, 31}},  // dim 13
    {6, 1, {1, 3, 3, 9, 7, 49}},  // dim 14
    {6, 13, {1, 1, 1, 15, 21, 21}},  // dim 15
    {6, 16, {1, 3, 1, 13, 27, 49}},  // dim 16
    {6, 19, {1, 1, 1, 15, 7, 5}},  // dim 17
    {6, 22, {1, 3, 1, 15, 13, 25}},  // dim 18
    {6, 25, {1, 1, 5, 5, 19, 61}},  // dim 19
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},  // dim 20
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},  // dim 21
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},  // dim 22
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},  // dim 23
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},  // dim 24
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},  // dim 25
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},  // dim 26
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},  // dim 27
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},  // dim 28
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},  // dim 29
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},  // dim 30
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},  // dim 31
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},  // dim 32
}};

}  // namespace qmcdl::detail
