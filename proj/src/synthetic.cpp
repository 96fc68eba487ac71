#include "asag/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "asag/error.hpp"
#include "asag/rng.hpp"
#include "asag/text.hpp"

namespace asag::synthetic {

namespace {

struct Vignette {
    const char* patient;  // short descriptor used in summaries
    const char* stem;
    std::vector<const char*> correct;
    std::vector<const char*> distractors;
    std::vector<const char*> cues;
    std::vector<const char*> history;  // stem sentences reused by summaries
};

const std::vector<Vignette>& vignettes() {
    static const std::vector<Vignette> v = {
        {"A 26-year-old man",
         "A previously healthy 26-year-old man is brought to the emergency department because of a tingling "
         "sensation in his fingers and toes for 3 days and progressive weakness of his legs. He had an upper "
         "respiratory tract infection 2 weeks ago. He has not traveled recently. He was unable to get up from "
         "bed this morning and called the ambulance. Temperature is 37.3°C (99.1°F), pulse is 110/min, "
         "respirations are 22/min, and blood pressure is 128/82 mm Hg. Pulse oximetry on room air shows an "
         "oxygen saturation of 99%. Physical examination shows weakness of all four extremities in flexion and "
         "extension; this weakness is increased in the distal compared with the proximal muscle groups. Deep "
         "tendon reflexes are absent throughout. The sensation is mildly decreased over both feet.",
         {"Guillain-Barré syndrome", "acute immune-mediated polyneuropathy"},
         {"myasthenia gravis", "transverse myelitis", "botulism", "multiple sclerosis",
          "hypokalemic periodic paralysis"},
         {"progressive weakness of the legs", "absent deep tendon reflexes", "recent respiratory infection",
          "tingling in fingers and toes", "distal weakness", "decreased sensation over the feet"},
         {"He had an upper respiratory tract infection 2 weeks ago.",
          "Deep tendon reflexes are absent throughout."}},
        {"A 19-year-old woman",
         "A 19-year-old woman is brought to the emergency department because of nausea, vomiting, and abdominal "
         "pain for 1 day. She has had increased thirst and polyuria for 2 weeks and has lost 4 kg. Her breath "
         "has a fruity odor. Pulse is 118/min, respirations are 28/min and deep, and blood pressure is 98/60 "
         "mm Hg. Serum glucose concentration is 540 mg/dL, and urine ketones are strongly positive. Arterial "
         "blood gas analysis shows a pH of 7.12.",
         {"diabetic ketoacidosis", "DKA", "ketoacidosis from type 1 diabetes mellitus"},
         {"hyperosmolar hyperglycemic state", "acute pancreatitis", "viral gastroenteritis", "lactic acidosis",
          "alcoholic ketoacidosis"},
         {"increased thirst and polyuria", "fruity breath odor", "serum glucose of 540", "positive urine ketones",
          "deep rapid respirations", "low arterial pH"},
         {"She has had increased thirst and polyuria for 2 weeks and has lost 4 kg.",
          "Her breath has a fruity odor."}},
        {"A 20-year-old college student",
         "A 20-year-old college student is brought to the emergency department because of fever, severe "
         "headache, and neck stiffness for 12 hours. He has photophobia and has vomited twice. Temperature is "
         "39.6°C (103.3°F), pulse is 124/min, and blood pressure is 102/64 mm Hg. Examination shows nuchal "
         "rigidity and scattered petechiae over the legs. Cerebrospinal fluid analysis shows a neutrophil "
         "count of 2,400/mm3 and a low glucose concentration.",
         {"bacterial meningitis", "meningococcal meningitis"},
         {"viral meningitis", "subarachnoid hemorrhage", "migraine", "herpes encephalitis", "influenza"},
         {"fever and headache", "neck stiffness", "photophobia", "petechial rash on the legs",
          "neutrophils in the cerebrospinal fluid", "low cerebrospinal fluid glucose"},
         {"He has photophobia and has vomited twice.",
          "Examination shows nuchal rigidity and scattered petechiae over the legs."}},
        {"A 62-year-old man",
         "A 62-year-old man comes to the emergency department because of crushing substernal chest pain "
         "radiating to his left arm for 45 minutes. He is diaphoretic and nauseated. He has smoked one pack of "
         "cigarettes daily for 40 years and has hypertension. Pulse is 98/min, and blood pressure is 150/92 mm "
         "Hg. An ECG shows ST-segment elevation in leads II, III, and aVF. Serum troponin concentration is "
         "increased.",
         {"inferior wall myocardial infarction", "acute ST-elevation myocardial infarction", "STEMI"},
         {"unstable angina", "aortic dissection", "acute pericarditis", "pulmonary embolism",
          "gastroesophageal reflux disease"},
         {"crushing substernal chest pain", "pain radiating to the left arm", "ST-segment elevation in II, III and aVF",
          "increased troponin", "diaphoresis", "long smoking history"},
         {"He is diaphoretic and nauseated.",
          "An ECG shows ST-segment elevation in leads II, III, and aVF."}},
        {"A 45-year-old woman",
         "A 45-year-old woman develops sudden shortness of breath and pleuritic chest pain 3 days after hip "
         "replacement surgery. Her left calf is swollen and tender. Pulse is 124/min, and respirations are "
         "30/min. Pulse oximetry on room air shows an oxygen saturation of 88%. The lungs are clear to "
         "auscultation. An ECG shows sinus tachycardia.",
         {"pulmonary embolism", "pulmonary thromboembolism", "PE"},
         {"pneumonia", "tension pneumothorax", "myocardial infarction", "acute heart failure",
          "asthma exacerbation"},
         {"sudden shortness of breath", "recent hip surgery", "swollen tender left calf", "low oxygen saturation",
          "sinus tachycardia", "clear lungs"},
         {"Her left calf is swollen and tender.", "The lungs are clear to auscultation."}},
        {"A 68-year-old man",
         "A 68-year-old man comes to the physician because of fever, chills, and cough productive of "
         "rust-colored sputum for 3 days. He has right-sided chest pain on inspiration. Temperature is 39.2°C "
         "(102.6°F), and respirations are 26/min. Examination shows crackles and bronchial breath sounds over the "
         "right lower lung field. Leukocyte count is 17,500/mm3. A chest x-ray shows consolidation of the right "
         "lower lobe.",
         {"community-acquired pneumonia", "pneumococcal pneumonia", "lobar pneumonia"},
         {"acute bronchitis", "lung cancer", "pulmonary embolism", "tuberculosis", "heart failure"},
         {"fever and chills", "rust-colored sputum", "productive cough", "crackles over the right lower lung",
          "right lower lobe consolidation", "leukocytosis"},
         {"He has right-sided chest pain on inspiration.",
          "A chest x-ray shows consolidation of the right lower lobe."}},
        {"A 32-year-old woman",
         "A 32-year-old woman comes to the physician because of palpitations, heat intolerance, and a 6-kg "
         "weight loss over 3 months despite an increased appetite. She feels anxious. Pulse is 112/min. "
         "Examination shows a fine tremor of the outstretched hands, a diffuse nontender goiter, and "
         "exophthalmos. Serum thyroid-stimulating hormone concentration is undetectable.",
         {"Graves disease", "diffuse toxic goiter", "autoimmune hyperthyroidism"},
         {"toxic multinodular goiter", "subacute thyroiditis", "generalized anxiety disorder",
          "pheochromocytoma", "hypothyroidism"},
         {"heat intolerance", "weight loss despite increased appetite", "fine tremor", "diffuse goiter",
          "exophthalmos", "undetectable TSH"},
         {"She feels anxious.",
          "Examination shows a fine tremor of the outstretched hands, a diffuse nontender goiter, and "
          "exophthalmos."}},
        {"A 17-year-old boy",
         "A 17-year-old boy comes to the emergency department because of abdominal pain that began around the "
         "umbilicus and moved to the right lower quadrant over 18 hours. He has anorexia and nausea. "
         "Temperature is 38.2°C (100.8°F). Examination shows tenderness at McBurney point with rebound and "
         "guarding. Leukocyte count is 14,200/mm3.",
         {"acute appendicitis", "appendicitis"},
         {"mesenteric adenitis", "viral gastroenteritis", "Meckel diverticulitis", "kidney stone",
          "Crohn disease"},
         {"periumbilical pain moving to the right lower quadrant", "tenderness at McBurney point",
          "rebound tenderness", "anorexia", "low-grade fever", "leukocytosis"},
         {"He has anorexia and nausea.",
          "Examination shows tenderness at McBurney point with rebound and guarding."}},
        {"A 38-year-old woman",
         "A 38-year-old woman comes to the physician because of fatigue and shortness of breath on exertion "
         "for 4 months. She has heavy menstrual bleeding and craves ice. Examination shows pallor of the "
         "conjunctivae and spoon-shaped nails. Hemoglobin concentration is 8.9 g/dL, and mean corpuscular "
         "volume is 68 fL. Serum ferritin concentration is decreased.",
         {"iron deficiency anemia", "microcytic anemia from iron deficiency"},
         {"beta thalassemia minor", "anemia of chronic disease", "vitamin B12 deficiency", "hypothyroidism",
          "sideroblastic anemia"},
         {"heavy menstrual bleeding", "craving ice", "pallor", "spoon-shaped nails", "low ferritin",
          "low mean corpuscular volume"},
         {"She has heavy menstrual bleeding and craves ice.",
          "Examination shows pallor of the conjunctivae and spoon-shaped nails."}},
        {"A 55-year-old man",
         "A 55-year-old man is awakened from sleep by severe pain and swelling of the right great toe. He drank "
         "heavily at a party the previous evening and takes hydrochlorothiazide for hypertension. Temperature "
         "is 37.9°C (100.2°F). The first metatarsophalangeal joint is red, hot, and exquisitely tender. Joint "
         "aspiration shows needle-shaped, negatively birefringent crystals.",
         {"acute gouty arthritis", "gout", "podagra"},
         {"septic arthritis", "pseudogout", "cellulitis", "rheumatoid arthritis", "osteoarthritis"},
         {"painful swollen great toe", "pain at night", "heavy alcohol intake", "hydrochlorothiazide use",
          "negatively birefringent crystals", "red hot joint"},
         {"He drank heavily at a party the previous evening and takes hydrochlorothiazide for hypertension.",
          "The first metatarsophalangeal joint is red, hot, and exquisitely tender."}},
        {"A 48-year-old man",
         "A 48-year-old man comes to the emergency department because of severe epigastric pain radiating to "
         "the back for 10 hours with repeated vomiting. He drinks eight beers daily. The pain is relieved by "
         "leaning forward. Pulse is 112/min. Examination shows epigastric tenderness with guarding. Serum lipase "
         "activity is five times the upper limit of normal.",
         {"acute pancreatitis", "alcoholic pancreatitis"},
         {"perforated peptic ulcer", "acute cholecystitis", "myocardial infarction",
          "abdominal aortic aneurysm", "gastritis"},
         {"epigastric pain radiating to the back", "heavy alcohol use", "repeated vomiting", "increased lipase",
          "relief on leaning forward", "epigastric tenderness"},
         {"He drinks eight beers daily.", "The pain is relieved by leaning forward."}},
        {"A 42-year-old woman",
         "A 42-year-old woman comes to the emergency department because of right upper quadrant pain for 8 "
         "hours that began after a fatty meal. Temperature is 38.5°C (101.3°F). Inspiration stops during "
         "palpation of the right upper quadrant. Leukocyte count is 15,000/mm3. Ultrasonography shows "
         "gallstones with gallbladder wall thickening and pericholecystic fluid.",
         {"acute cholecystitis", "calculous cholecystitis"},
         {"biliary colic", "choledocholithiasis", "acute hepatitis", "peptic ulcer disease",
          "ascending cholangitis"},
         {"right upper quadrant pain", "positive Murphy sign", "pain after a fatty meal",
          "gallbladder wall thickening", "fever", "gallstones on ultrasonography"},
         {"Inspiration stops during palpation of the right upper quadrant.",
          "Ultrasonography shows gallstones with gallbladder wall thickening and pericholecystic fluid."}},
        {"A 35-year-old man",
         "A 35-year-old man comes to the emergency department because of sudden colicky right flank pain "
         "radiating to the groin for 4 hours. He is nauseated and cannot lie still. There is right "
         "costovertebral angle tenderness. Urinalysis shows blood. A CT scan shows a 6-mm stone in the right "
         "ureter.",
         {"nephrolithiasis", "ureteral stone", "renal colic"},
         {"acute pyelonephritis", "appendicitis", "testicular torsion", "abdominal aortic aneurysm",
          "lumbar muscle strain"},
         {"colicky flank pain", "pain radiating to the groin", "hematuria", "costovertebral angle tenderness",
          "restlessness", "stone in the right ureter"},
         {"He is nauseated and cannot lie still.", "Urinalysis shows blood."}},
        {"A 50-year-old woman",
         "A 50-year-old woman comes to the physician because of fatigue, cold intolerance, constipation, and a "
         "5-kg weight gain over 6 months. Her skin is dry, and her hair is thinning. Pulse is 54/min. "
         "Examination shows delayed relaxation of the ankle reflexes and nonpitting edema of the legs. Serum "
         "thyroid-stimulating hormone concentration is increased, and free thyroxine concentration is "
         "decreased.",
         {"primary hypothyroidism", "Hashimoto thyroiditis", "hypothyroidism"},
         {"major depressive disorder", "Graves disease", "chronic fatigue syndrome", "anemia",
          "Cushing syndrome"},
         {"cold intolerance", "weight gain", "constipation", "bradycardia", "delayed relaxation of reflexes",
          "increased TSH"},
         {"Her skin is dry, and her hair is thinning.", "Pulse is 54/min."}},
        {"A 70-year-old man",
         "A 70-year-old man comes to the physician because of increasing shortness of breath for 2 weeks. He "
         "now sleeps on three pillows and wakes up at night gasping for air. He had a myocardial infarction 3 "
         "years ago. Examination shows jugular venous distention, bibasilar crackles, an S3 gallop, and "
         "bilateral pitting ankle edema. A chest x-ray shows cardiomegaly and small pleural effusions.",
         {"congestive heart failure", "acute decompensated heart failure", "left ventricular failure"},
         {"pneumonia", "chronic obstructive pulmonary disease exacerbation", "nephrotic syndrome",
          "pulmonary fibrosis", "cirrhosis"},
         {"orthopnea", "paroxysmal nocturnal dyspnea", "jugular venous distention", "bibasilar crackles",
          "pitting ankle edema", "S3 gallop"},
         {"He had a myocardial infarction 3 years ago.",
          "A chest x-ray shows cardiomegaly and small pleural effusions."}},
        {"A 40-year-old woman",
         "A 40-year-old woman comes to the physician because of a chronic cough productive of large amounts of "
         "foul-smelling sputum for 3 years. She has had recurrent pneumonia and occasional hemoptysis. She has "
         "never smoked. Examination shows coarse crackles over the lower lung fields and digital clubbing. A CT "
         "scan of the chest shows dilated, thick-walled bronchi.",
         {"bronchiectasis", "non-cystic fibrosis bronchiectasis"},
         {"chronic obstructive pulmonary disease", "lung abscess", "pulmonary tuberculosis", "chronic bronchitis",
          "lung cancer"},
         {"copious foul-smelling sputum", "recurrent pneumonia", "hemoptysis", "digital clubbing",
          "dilated bronchi on CT", "coarse crackles"},
         {"She has never smoked.", "She has had recurrent pneumonia and occasional hemoptysis."}},
        {"A 30-year-old woman",
         "A 30-year-old woman comes to the physician because of double vision and drooping eyelids that worsen "
         "at the end of the day for 2 months. She has difficulty chewing. Ptosis worsens after sustained upward "
         "gaze. Deep tendon reflexes are normal. Serum acetylcholine receptor antibodies are positive.",
         {"myasthenia gravis", "autoimmune myasthenia"},
         {"Guillain-Barré syndrome", "multiple sclerosis", "Lambert-Eaton syndrome", "botulism",
          "brainstem stroke"},
         {"fluctuating ptosis", "double vision", "weakness worse at the end of the day", "difficulty chewing",
          "acetylcholine receptor antibodies", "normal reflexes"},
         {"She has difficulty chewing.", "Ptosis worsens after sustained upward gaze."}},
        {"A 28-year-old woman",
         "A 28-year-old woman comes to the emergency department because of fever, chills, and right flank pain "
         "for 2 days. Painful urination and urinary frequency began 4 days ago. Temperature is 39.4°C "
         "(102.9°F). There is right costovertebral angle tenderness. Urinalysis shows leukocytes and white "
         "blood cell casts.",
         {"acute pyelonephritis", "upper urinary tract infection"},
         {"acute cystitis", "nephrolithiasis", "appendicitis", "pelvic inflammatory disease",
          "ectopic pregnancy"},
         {"fever and flank pain", "painful urination", "costovertebral angle tenderness",
          "white blood cell casts", "urinary frequency", "chills"},
         {"Painful urination and urinary frequency began 4 days ago.",
          "There is right costovertebral angle tenderness."}},
        {"A 72-year-old man",
         "A 72-year-old man is brought to the emergency department 1 hour after the sudden onset of weakness of "
         "his right arm and leg and difficulty speaking. He has atrial fibrillation and does not take an "
         "anticoagulant. Blood pressure is 168/94 mm Hg, and the pulse is irregularly irregular. Examination "
         "shows right hemiparesis, a right facial droop, and expressive aphasia. A CT scan of the head shows no "
         "hemorrhage.",
         {"acute ischemic stroke", "cardioembolic stroke", "left middle cerebral artery stroke"},
         {"intracerebral hemorrhage", "transient ischemic attack", "Todd paralysis", "hypoglycemia",
          "Bell palsy"},
         {"sudden right hemiparesis", "expressive aphasia", "atrial fibrillation without anticoagulation",
          "right facial droop", "no hemorrhage on CT", "irregularly irregular pulse"},
         {"He has atrial fibrillation and does not take an anticoagulant.",
          "A CT scan of the head shows no hemorrhage."}},
        {"An 18-year-old man",
         "An 18-year-old man comes to the physician because of sore throat, fever, and fatigue for 1 week. "
         "Temperature is 38.6°C (101.5°F). Examination shows tonsillar exudates, posterior cervical "
         "lymphadenopathy, and splenomegaly. A peripheral blood smear shows atypical lymphocytes. A heterophile "
         "antibody test is positive.",
         {"infectious mononucleosis", "Epstein-Barr virus infection"},
         {"streptococcal pharyngitis", "acute HIV infection", "cytomegalovirus infection", "acute leukemia",
          "viral pharyngitis"},
         {"sore throat and fever", "posterior cervical lymphadenopathy", "splenomegaly", "atypical lymphocytes",
          "positive heterophile antibody test", "fatigue"},
         {"Temperature is 38.6°C (101.5°F).",
          "A peripheral blood smear shows atypical lymphocytes."}},
    };
    return v;
}

const char* const kLeadIn = "What is the most likely diagnosis?";

const std::vector<const char*>& hedges() {
    static const std::vector<const char*> h = {"", "", "", "", "likely ", "probably ", "most likely ",
                                               "I think "};
    return h;
}

const std::vector<const char*>& connectors() {
    static const std::vector<const char*> c = {" given ", " because of ", " based on ", " due to the ",
                                               " with "};
    return c;
}

// Swaps two adjacent interior letters of one word of length >= 5.
std::string add_typo(const std::string& s, Rng& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t b = i;
        while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
        if (i - b >= 5) words.emplace_back(b, i);
    }
    if (words.empty()) return s;
    const auto [b, e] = rng.pick(words);
    std::string out = s;
    const std::size_t at = b + 1 + static_cast<std::size_t>(rng.index(e - b - 3));
    std::swap(out[at], out[at + 1]);
    return out;
}

std::string recase(const std::string& s, Rng& rng) {
    std::string out = s;
    switch (rng.index(4)) {
        case 0:
            for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            break;
        case 1:
            if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
            break;
        default:
            break;
    }
    return out;
}

std::string cite_cues(const Vignette& v, Rng& rng) {
    const std::size_t n = rng.chance(0.25) ? 2 : 1;
    auto picks = rng.sample_indices(v.cues.size(), n);
    rng.shuffle(picks);
    std::string out = v.cues[picks[0]];
    if (picks.size() > 1) out += std::string(" and ") + v.cues[picks[1]];
    return out;
}

std::string make_answer(const Vignette& v, bool correct, bool verbose, const SyntheticConfig& cfg, Rng& rng) {
    const auto& pool = correct ? v.correct : v.distractors;
    std::string text = std::string(rng.pick(hedges())) + rng.pick(pool);
    if (verbose) text += std::string(rng.pick(connectors())) + cite_cues(v, rng);
    text = recase(text, rng);
    if (rng.chance(cfg.typo_rate)) text = add_typo(text, rng);
    return text;
}

std::string join_list(const std::vector<std::string>& parts) {
    if (parts.size() == 1) return parts[0];
    std::string out;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
    return out + " and " + parts.back();
}

std::string make_summary(const Vignette& v, const SyntheticConfig& cfg, Rng& rng) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.index(3));
    auto picks = rng.sample_indices(v.cues.size(), std::min(n, v.cues.size()));
    rng.shuffle(picks);
    std::vector<std::string> cues;
    for (auto i : picks) cues.emplace_back(v.cues[i]);
    std::string body;
    switch (rng.index(3)) {
        case 0: body = std::string(v.patient) + " presents with " + join_list(cues) + "."; break;
        case 1: body = std::string(v.patient) + " with " + join_list(cues) + "."; break;
        default: body = "Patient has " + join_list(cues) + "."; break;
    }
    if (rng.chance(0.5)) body += std::string(" ") + rng.pick(v.history);
    if (rng.chance(cfg.summary_differential_rate)) {
        std::string a = rng.pick(v.correct);
        std::string b = rng.pick(v.distractors);
        if (rng.chance(0.5)) std::swap(a, b);
        if (rng.chance(cfg.summary_impression_rate)) return "Impression: " + a + " versus " + b + ".";
        body += rng.chance(0.5) ? " Differential includes " + a + " and " + b + "."
                                : " Consider " + a + " versus " + b + ".";
    }
    return body;
}

std::string item_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "item%02zu", i + 1);
    return buf;
}

}  // namespace

void SyntheticConfig::validate() const {
    if (items == 0) fail(ErrorCode::InvalidArgument, "synthetic: items must be >= 1");
    if (responses_per_item < 2) fail(ErrorCode::InvalidArgument, "synthetic: responses_per_item must be >= 2");
    if (!(correct_share > 0.0 && correct_share < 1.0)) {
        fail(ErrorCode::InvalidArgument, "synthetic: correct_share must lie in (0,1)");
    }
    if (!(verbose_share >= 0.0 && verbose_share <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "synthetic: verbose_share must lie in [0,1]");
    }
    if (!(typo_rate >= 0.0 && typo_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "synthetic: typo_rate must lie in [0,1]");
    }
    if (!(summary_differential_rate >= 0.0 && summary_differential_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "synthetic: summary_differential_rate must lie in [0,1]");
    }
    if (!(summary_impression_rate >= 0.0 && summary_impression_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "synthetic: summary_impression_rate must lie in [0,1]");
    }
}

std::size_t vignette_count() { return vignettes().size(); }

ReferenceCorpus make_reference_corpus(const SyntheticConfig& cfg) {
    cfg.validate();
    const auto& all = vignettes();
    const std::size_t n_items = std::min(cfg.items, all.size());
    std::vector<Item> items;
    std::vector<Response> responses;
    ReferenceCorpus out;
    for (std::size_t i = 0; i < n_items; ++i) {
        const auto& v = all[i];
        const auto id = item_id(i);
        Item item{id, v.stem, kLeadIn, {}};
        for (const auto* a : v.correct) item.correct_answers.emplace_back(a);
        items.push_back(std::move(item));

        Rng rng(derive_seed(cfg.seed, "synthetic/" + id));
        const auto n_correct = static_cast<std::size_t>(
            std::llround(cfg.correct_share * static_cast<double>(cfg.responses_per_item)));
        for (std::size_t r = 0; r < cfg.responses_per_item; ++r) {
            const bool correct = r < n_correct;
            const bool verbose = rng.chance(cfg.verbose_share);
            char rid[48];
            std::snprintf(rid, sizeof rid, "%s/real/%03zu", id.c_str(), r);
            responses.push_back(Response{rid, id, make_answer(v, correct, verbose, cfg, rng),
                                         correct ? Label::Correct : Label::Incorrect, Provenance::Real});
        }
        Rng srng(derive_seed(cfg.seed, "synthetic/summaries/" + id));
        for (std::size_t s = 0; s < cfg.summaries_per_item; ++s) {
            out.summaries.push_back({id, make_summary(v, cfg, srng)});
        }
    }
    out.corpus = Corpus(std::move(items), std::move(responses));
    return out;
}

ReferenceDataset make_reference_dataset(std::uint64_t seed) {
    SyntheticConfig sc;
    sc.seed = seed;
    auto ref = make_reference_corpus(sc);
    gaming::GeneratorConfig gc;
    gc.seed = seed;
    gaming::GenerationCounts counts;
    counts.s1_per_variant = kReferenceS1PerVariant;
    counts.s3_per_item = kReferenceS3PerItem;
    const auto full = gaming::generate_all(ref.corpus, gc, gaming::default_lexicons(), counts, ref.summaries);
    ReferenceDataset out;
    out.pools = gaming::subsample_pools(full, kReferenceSubsampleRate, seed);
    auto responses = ref.corpus.responses();
    for (auto& r : out.pools.all()) responses.push_back(std::move(r));
    out.data = Corpus(ref.corpus.items(), std::move(responses));
    return out;
}

}  // namespace asag::synthetic
