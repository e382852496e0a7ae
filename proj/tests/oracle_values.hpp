// Copyright 2026 The closs Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Generated by tests/oracles/gen_oracles.py. Do not edit.
#pragma once

#include <cstddef>

namespace oracle {

inline constexpr double kLevinsonCoeffs[] = {0.53125, -0.04999999999999998, -0.03125000000000001};
inline constexpr double kAr1Weighting[] = {0.13981096408317573, 0.14194982700565656, 0.14832592742299586, 0.15881970025203138, 0.17323803895018333, 0.19132299482258533, 0.21276292579642406, 0.23720522865836546, 0.2642697408611003, 0.29356194807654346, 0.3246852621214377, 0.3572518128001531, 0.3908913966771664, 0.4252584192347447, 0.4600368345323981, 0.4949432167500418, 0.5297281869210699, 0.5641764678318207, 0.5981058564906074, 0.63136539465118, 0.6638329917711135, 0.6954127188217901, 0.726031951456468, 0.7556385015102436, 0.7841978394810686, 0.8116904791065144, 0.838109569039122, 0.863458715907605, 0.8877500472949311, 0.9110025117133349, 0.9332404047773034, 0.9544921057470214, 0.9747890057796411, 0.9941646080181763, 1.012653779600073, 1.0302921364068902, 1.0471155426151033, 1.063159708630284, 1.078459872636489, 1.0930505526603844, 1.1069653576624, 1.120236847679431, 1.1328964344294443, 1.1449743150362928, 1.1564994326412101, 1.1674994586404024, 1.1780007921343871, 1.1880285729048752, 1.1976067048607364, 1.2067578874275824, 1.2155036528071825, 1.2238644074137746, 1.2318594761141022, 1.239507148165342, 1.2468247239677226, 1.2538285619332616, 1.2605341249246422, 1.2669560258437553, 1.2731080720522734, 1.2790033083905084, 1.2846540586288107, 1.2900719652406738, 1.29526802743064, 1.3002526373850811, 1.3050356147414062, 1.30962623929267, 1.3140332819609657, 1.3182650340852966, 1.3223293350786542, 1.3262335985153735, 1.329984836714024, 1.3335896838835786, 1.3370544179017139, 1.3403849807941768, 1.3435869979833337, 1.3466657963726643, 1.3496264213320541, 1.3524736526465493, 1.3552120194887693, 1.357845814472572, 1.360379106842871, 1.3628157548537692, 1.3651594173844441, 1.367413564839544, 1.3695814893781897, 1.3716663145131682, 1.3736710041194005, 1.3755983708884238, 1.3774510842633723, 1.3792316778867724, 1.3809425565914402, 1.382586002962834, 1.3841641834993732, 1.3856791543955345, 1.3871328669708844, 1.388527172766701, 1.389863828330395, 1.391144499706592, 1.3923707666524647, 1.3935441265937474, 1.3946659983367262, 1.3957377255504526, 1.3967605800325018, 1.3977357647706181, 1.3986644168117968, 1.3995476099494986, 1.4003863572389863, 1.401181613350041, 1.401934276765662, 1.4026451918347578, 1.4033151506862138, 1.4039448950112092, 1.4045351177201368, 1.405086464479981, 1.4055995351375623, 1.406074885033631, 1.4065130262123777, 1.4069144285305404, 1.40727952066992, 1.4076086910567944, 1.4079022886913277, 1.4081606238898219, 1.408383968942307, 1.4085725586876825, 1.4087265910083462, 1.4088462272459785, 1.4089315925398322, 1.4089827760887186, 1.4089998313374938};
inline constexpr std::size_t kOctaveLo[] = {2, 3, 4, 5, 6, 7, 9, 11, 14, 17, 22, 27, 34, 43, 54};
inline constexpr std::size_t kOctaveHi[] = {3, 4, 5, 6, 7, 9, 11, 14, 17, 22, 27, 34, 43, 54, 68};
inline constexpr std::size_t kLoudnessLo[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 23, 24, 26, 28, 30, 33, 36, 39, 42, 45, 50, 54, 59, 64, 70, 76, 83, 91, 99, 108, 117};
inline constexpr std::size_t kLoudnessHi[] = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 23, 24, 26, 28, 30, 33, 36, 39, 42, 45, 50, 54, 59, 64, 70, 76, 83, 91, 99, 108, 117, 129};
inline constexpr double kLoudnessFrame3[] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5224253649932669, 6.6531267159425695, 11.555538058697428, 13.415605090753274, 11.832851560816357, 7.2810510636270775, 1.4987491060456735, 0.0, 0.0, 3.5117638926173695, 9.97863281066401, 14.624260685615438, 16.1086557701826, 14.143953985094395, 10.817071294757458, 0.0, 5.993313809458281, 20.167503193532788, 23.146011850058972, 12.970064851699204, 16.342425332188803, 29.372171327240117, 15.033928755513871, 18.733604457159778, 33.143006970927814, 20.225469695627318, 33.43428320536073, 26.60472134932806, 28.26012024015317, 32.34405584781183, 28.014990266342192, 27.113536513905384, 26.710744334855985, 29.216867332751583, 28.507890082637335, 33.66347137128289};
inline constexpr double kPesqTermsAttenuated[] = {10.772656815223433, 0.0};
inline constexpr double kPesqTermsAmplified[] = {998236.6296624132, 4444746.59689549};
inline constexpr double kStoiFrames[] = {-0.5122842733596217, -0.51706189045208, -0.5117857086128409, -0.5073330134549667, -0.5287404989290585, -0.5394196092913586, -0.5435995735856999, -0.544878457790239, -0.5416809908325171, -0.5485267315848216, -0.5504774254433599};

}  // namespace oracle
