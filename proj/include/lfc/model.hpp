#pragma once

#include "lfc/linalg.hpp"

#include <map>
#include <string>
#include <vector>

namespace lfc::model {

// Every control area is a fixed 5th-order model with state order
//   [df, dPm, dPv, dPtie, iace]
// (frequency, mechanical power, valve position, tie-line power, integral of
// the area control error). All downstream index arithmetic relies on this
// ordering, so it is a frozen contract.
inline constexpr int kStates       = 5;
inline constexpr int kInputs       = 1;
inline constexpr int kDisturbances = 1;
inline constexpr int kOutputs      = 3; // measured: df, dPtie, iace

// Physical parameters of one control area.
struct AreaParams {
    std::string name;
    double M    = 0.0; // inertia (p.u.*s^2)
    double D    = 0.0; // damping (p.u./Hz)
    double Tg   = 0.0; // governor time constant (s)
    double Tch  = 0.0; // turbine time constant (s)
    double R    = 0.0; // speed droop (Hz/p.u.)
    double beta = 0.0; // frequency bias factor (p.u./Hz)

    // Throws ParameterError naming the offending field.
    void validate() const;
};

// Symmetric tie-line synchronizing coefficients, zero diagonal,
// nonnegative off-diagonal (p.u./rad).
struct TieLines {
    Mat T;

    int area_count() const { return static_cast<int>(T.rows()); }
    void validate() const;
    static TieLines zero(int n_areas);
};

// State-space realization of one area.
struct AreaMatrices {
    Mat A;                        // 5x5
    std::map<int, Mat> coupling;  // j -> 5x5 interaction matrix (single nonzero at (3,0))
    Mat B;                        // 5x1
    Mat F;                        // 5x1 load-disturbance channel
    Mat C;                        // 3x5 selects states 0, 3, 4
};

// Populates the area realization. tie_row is the full length-N row of
// tie-line coefficients; tie_row[self] must be zero.
AreaMatrices build_area(const AreaParams& params, const Vec& tie_row, int self);

// Block-assembled N-area system.
struct CompositeSystem {
    int N = 0;
    std::vector<AreaMatrices> areas;
    Mat A;  // block-diagonal n x n
    Mat dA; // interaction matrix, zero diagonal blocks
    Mat B;  // block-diagonal n x m
    Mat F;  // block-diagonal n x q
    Mat C;  // block-diagonal p x n

    int n() const { return N * kStates; }
    int m() const { return N * kInputs; }
    int q() const { return N * kDisturbances; }
    int p() const { return N * kOutputs; }
};

CompositeSystem build_composite(const std::vector<AreaMatrices>& areas, const TieLines& ties);
CompositeSystem build_composite(const std::vector<AreaParams>& params, const TieLines& ties);

// Verification output z = Cx*x + Ce*e. Both maps are block-diagonal n x n.
struct OutputSelection {
    Mat Cx;
    Mat Ce;

    static OutputSelection identity(int n);
    // Diagonal weights, one per composite state.
    static OutputSelection from_diagonal(const Vec& state_weights, const Vec& error_weights);
    // Throws InputError when either map has entries outside its per-area
    // diagonal blocks.
    void validate_block_diagonal(const CompositeSystem& sys) const;
};

// Cx = Ce = I (exposes all states and estimation errors).
OutputSelection default_output_selection(const CompositeSystem& sys);

} // namespace lfc::model
