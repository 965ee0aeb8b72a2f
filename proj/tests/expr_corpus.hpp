#pragma once

// Shared expression corpus for round-trip and derivative checks. All
// entries evaluate safely on t in [1,2], x1,x2 in [0.5,2], d1,d2 in [-2,2],
// z in [-1,1].

#include <string>
#include <vector>

namespace corpus {

inline std::vector<std::string> expressions() {
    std::vector<std::string> base = {
        "d1^2",
        "x1^2 + d1^2",
        "(d1 - sin(t))^2 + 0.5*x1^2",
        "t*x1*d1",
        "exp(-t)*d1^2",
        "ln(1 + x1^2)",
        "sqrt(1 + d1^2)",
        "cos(t)^2 + sin(t)^2",
        "x1/(2 + d1^2)",
        "t^3 - 2*t^2 + 7",
        "(x1 + x2)^2 + (d1 - d2)^2",
        "x2*d2 - x1*d1",
        "exp(x1 - 1)*cos(d1)",
        "ln(t) + ln(x1 + 1)",
        "d1^4 - d1^2 + 1",
        "(t^2 - 1)^0.5",
        "abs(d1)*d1",
        "sin(t*x1)",
        "x1^1.5 + 2",
        "1/(1 + exp(-d1))",
        "z^2 + d1^2",
        "z*t - x1",
        "sqrt(x1) + sqrt(x2)",
        "(d1 + d2 + 1)^3",
        "pi*t + exp(1)",
        "cos(d1 - d2)*sin(x1 + x2)",
        "t^(-2) + x1^(-1)",
        "2^t",
        "x1^x2",
        "-d1^2 + 3*-x1",
        "(1 + t)/(1 + x1) - (1 - t)/(1 + x2)",
        "exp(sin(t)) + ln(2 + cos(t))",
        "d1*d2*t*x1*x2",
        "((x1 - 1)^2 + 0.25)^0.5",
    };
    std::vector<std::string> out = base;
    for (std::size_t i = 0; out.size() < 100; ++i) {
        const std::string& a = base[i % base.size()];
        const std::string& b = base[(i * 7 + 3) % base.size()];
        switch (i % 4) {
            case 0: out.push_back("(" + a + ") + (" + b + ")"); break;
            case 1: out.push_back("(" + a + ")*0.5 - (" + b + ")/3"); break;
            case 2: out.push_back("(" + a + ")*(" + b + ")"); break;
            default: out.push_back("((" + a + ") - (" + b + "))^2"); break;
        }
    }
    return out;
}

} // namespace corpus
