#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hede {

/// Base class for every failure the library reports. The CLI maps the
/// category onto its exit code.
class Error : public std::runtime_error
{
public:
    enum class Category { Input, Grid, Numerical };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category)
    {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

class InvalidArgument : public Error
{
public:
    explicit InvalidArgument(const std::string& what)
        : Error(Category::Input, what)
    {}
};

class DimensionMismatch : public Error
{
public:
    explicit DimensionMismatch(const std::string& what)
        : Error(Category::Input, "dimension mismatch: " + what)
    {}
};

class ConstantColumn : public Error
{
public:
    explicit ConstantColumn(std::size_t column)
        : Error(Category::Input,
                "column " + std::to_string(column) + " is monomorphic (zero variance)"),
          column_(column)
    {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class TooFewSamples : public Error
{
public:
    explicit TooFewSamples(std::size_t n)
        : Error(Category::Input,
                "need at least 2 samples, got " + std::to_string(n))
    {}
};

/// Iterative solver hit its iteration cap. Carries what was achieved.
class NotConverged : public Error
{
public:
    NotConverged(const std::string& solver, std::size_t iterations, double last_change)
        : Error(Category::Numerical,
                solver + " did not converge after " + std::to_string(iterations)
                    + " iterations (last change " + std::to_string(last_change) + ")"),
          iterations_(iterations),
          last_change_(last_change)
    {}

    std::size_t iterations() const noexcept { return iterations_; }
    double last_change() const noexcept { return last_change_; }

private:
    std::size_t iterations_;
    double last_change_;
};

/// n - df is too small to debias with (n - df < 0.005 n).
class DegenerateDf : public Error
{
public:
    DegenerateDf(double df, std::size_t n)
        : Error(Category::Numerical,
                "degenerate degrees of freedom: df = " + std::to_string(df)
                    + " with n = " + std::to_string(n)),
          df_(df)
    {}

    double df() const noexcept { return df_; }

private:
    double df_;
};

/// No tuning parameter survived the df/n filter.
class EmptyGrid : public Error
{
public:
    EmptyGrid(const std::string& margin, double df_frac_min, double df_frac_max)
        : Error(Category::Grid,
                "empty " + margin + " grid: achieved df/n range ["
                    + std::to_string(df_frac_min) + ", " + std::to_string(df_frac_max)
                    + "] misses the admissible window"),
          df_frac_min_(df_frac_min),
          df_frac_max_(df_frac_max)
    {}

    double df_frac_min() const noexcept { return df_frac_min_; }
    double df_frac_max() const noexcept { return df_frac_max_; }

private:
    double df_frac_min_;
    double df_frac_max_;
};

class SingularBlock : public Error
{
public:
    SingularBlock(std::size_t block, double min_eigenvalue)
        : Error(Category::Numerical,
                "covariance block " + std::to_string(block)
                    + " is singular (min eigenvalue " + std::to_string(min_eigenvalue) + ")")
    {}
};

class NoBracket : public Error
{
public:
    explicit NoBracket(const std::string& what)
        : Error(Category::Numerical, "no sign change in search interval: " + what)
    {}
};

class NoNonzeros : public Error
{
public:
    explicit NoNonzeros(const std::string& what)
        : Error(Category::Input, "signal has no nonzero coordinates: " + what)
    {}
};

} // namespace hede
