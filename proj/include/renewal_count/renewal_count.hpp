#pragma once

#include "renewal_count/compute.hpp"
#include "renewal_count/conv_direct.hpp"
#include "renewal_count/conv_single.hpp"
#include "renewal_count/count_data.hpp"
#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/extrapolate.hpp"
#include "renewal_count/mc_oracle.hpp"
#include "renewal_count/model_fit.hpp"
#include "renewal_count/modified_renewal.hpp"
#include "renewal_count/optimize.hpp"
#include "renewal_count/probability_vector.hpp"
#include "renewal_count/special_functions.hpp"
#include "renewal_count/survival_table.hpp"
#include "renewal_count/studies.hpp"
